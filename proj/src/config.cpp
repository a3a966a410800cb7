#include "mfb/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mfb/error.hpp"

namespace mfb {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Thrown by value parsers; the caller adds line and key context.
struct BadValue {
    std::string why;
};

double to_double(std::string_view v) {
    v = trim(v);
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty()) throw BadValue{"'" + std::string(v) + "' is not a number"};
    return out;
}

double to_finite(std::string_view v) {
    const double x = to_double(v);
    if (!std::isfinite(x)) throw BadValue{"'" + std::string(trim(v)) + "' must be finite"};
    return x;
}

double to_positive(std::string_view v) {
    const double x = to_finite(v);
    if (!(x > 0.0)) throw BadValue{"must be positive"};
    return x;
}

std::uint64_t to_u64(std::string_view v) {
    v = trim(v);
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty()) {
        throw BadValue{"'" + std::string(v) + "' is not a non-negative integer"};
    }
    return out;
}

std::size_t to_count(std::string_view v) {
    const auto x = to_u64(v);
    if (x == 0) throw BadValue{"must be at least 1"};
    return static_cast<std::size_t>(x);
}

bool to_bool(std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw BadValue{"'" + std::string(v) + "' is not a boolean"};
}

std::vector<double> to_list(std::string_view v) {
    std::vector<double> out;
    v = trim(v);
    if (v.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = v.find(',', start);
        out.push_back(to_finite(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<double> to_positive_list(std::string_view v) {
    auto out = to_list(v);
    for (double x : out) {
        if (!(x > 0.0)) throw BadValue{"entries must be positive"};
    }
    return out;
}

template <class F>
auto enum_value(F parse, std::string_view v) {
    try {
        return parse(trim(v));
    } catch (const Error& e) {
        throw BadValue{e.what()};
    }
}

std::string list_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_number(v[i]);
    }
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define MFB_FIELD(section, key, setter, getter)                                            \
    Field {                                                                                \
        section, key, [](RunConfig& c, std::string_view v) { setter; },                    \
            [](const RunConfig& c) -> std::string { return getter; }                       \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        MFB_FIELD("model", "d", c.d = to_count(v), std::to_string(c.d)),
        MFB_FIELD("model", "T", c.T = to_positive(v), format_number(c.T)),

        MFB_FIELD("kernel", "kind", c.kernel.kind = enum_value(parse_kernel_kind, v), to_string(c.kernel.kind)),
        MFB_FIELD("kernel", "amplitude", c.kernel.amplitude = to_finite(v), format_number(c.kernel.amplitude)),
        MFB_FIELD("kernel", "kappa", c.kernel.kappa = to_finite(v), format_number(c.kernel.kappa)),
        MFB_FIELD("kernel", "beta", c.kernel.beta = to_finite(v), format_number(c.kernel.beta)),
        MFB_FIELD("kernel", "delta", c.kernel.delta = to_finite(v), format_number(c.kernel.delta)),

        MFB_FIELD("drift", "kind", c.drift.kind = enum_value(parse_drift_kind, v), to_string(c.drift.kind)),
        MFB_FIELD("drift", "offset", c.drift.offset = to_list(v), list_text(c.drift.offset)),
        MFB_FIELD("drift", "matrix", c.drift.matrix = to_list(v), list_text(c.drift.matrix)),
        MFB_FIELD("drift", "amplitude", c.drift.amplitude = to_finite(v), format_number(c.drift.amplitude)),

        MFB_FIELD("diffusion", "kind", c.diffusion.kind = enum_value(parse_diffusion_kind, v),
                  to_string(c.diffusion.kind)),
        MFB_FIELD("diffusion", "matrix", c.diffusion.matrix = to_list(v), list_text(c.diffusion.matrix)),
        MFB_FIELD("diffusion", "base", c.diffusion.base = to_finite(v), format_number(c.diffusion.base)),
        MFB_FIELD("diffusion", "amplitude", c.diffusion.amplitude = to_finite(v),
                  format_number(c.diffusion.amplitude)),

        MFB_FIELD("initial", "kind", c.law.kind = enum_value(parse_law_kind, v), to_string(c.law.kind)),
        MFB_FIELD("initial", "location", c.law.location = to_list(v), list_text(c.law.location)),
        MFB_FIELD("initial", "scale", c.law.scale = to_finite(v), format_number(c.law.scale)),
        MFB_FIELD("initial", "lower", c.law.lower = to_list(v), list_text(c.law.lower)),
        MFB_FIELD("initial", "upper", c.law.upper = to_list(v), list_text(c.law.upper)),
        MFB_FIELD("initial", "other", c.law.other = to_list(v), list_text(c.law.other)),
        MFB_FIELD("initial", "weight", c.law.weight = to_finite(v), format_number(c.law.weight)),

        MFB_FIELD("sim", "n", c.n = to_count(v), std::to_string(c.n)),
        MFB_FIELD("sim", "steps", c.steps = to_count(v), std::to_string(c.steps)),
        MFB_FIELD("sim", "grid", c.grid = enum_value(parse_grid_kind, v), to_string(c.grid)),
        MFB_FIELD("sim", "gamma", c.gamma = to_finite(v), format_number(c.gamma)),
        MFB_FIELD("sim", "seed", c.seed = to_u64(v), std::to_string(c.seed)),
        MFB_FIELD("sim", "delta_factor", c.delta_factor = to_positive(v), format_number(c.delta_factor)),
        MFB_FIELD("sim", "write_flow", c.write_flow = to_bool(v), c.write_flow ? "true" : "false"),

        MFB_FIELD("estimator", "beta", c.beta = enum_value(parse_beta_kind, v), to_string(c.beta)),
        MFB_FIELD("estimator", "f", c.f.kind = enum_value(parse_test_function_kind, v), to_string(c.f.kind)),
        MFB_FIELD("estimator", "f_direction", c.f.direction = to_list(v), list_text(c.f.direction)),
        MFB_FIELD("estimator", "f_phase", c.f.phase = to_finite(v), format_number(c.f.phase)),
        MFB_FIELD("estimator", "f_center", c.f.center = to_list(v), list_text(c.f.center)),
        MFB_FIELD("estimator", "f_radius", c.f.radius = to_finite(v), format_number(c.f.radius)),
        MFB_FIELD("estimator", "f_width", c.f.width = to_positive(v), format_number(c.f.width)),
        MFB_FIELD("estimator", "phi_offset", c.phi.offset = to_list(v), list_text(c.phi.offset)),
        MFB_FIELD("estimator", "phi_scale", c.phi.scale = to_finite(v), format_number(c.phi.scale)),
        MFB_FIELD("estimator", "phi_center", c.phi.center = to_list(v), list_text(c.phi.center)),
        MFB_FIELD("estimator", "mode", c.mode = enum_value(parse_ensemble_mode, v), to_string(c.mode)),
        MFB_FIELD("estimator", "reference",
                  c.reference = v == "none" ? std::optional<double>{} : std::optional<double>{to_finite(v)},
                  c.reference ? format_number(*c.reference) : "none"),

        MFB_FIELD("oracle", "epsilons", c.epsilons = to_positive_list(v), list_text(c.epsilons)),
        MFB_FIELD("oracle", "fd_epsilon", c.fd_epsilon = to_positive(v), format_number(c.fd_epsilon)),
        MFB_FIELD("oracle", "probe_times", c.probe_times = to_positive_list(v), list_text(c.probe_times)),
        MFB_FIELD("oracle", "p", c.p = to_finite(v), format_number(c.p)),
        MFB_FIELD("oracle", "k", c.k = to_double(v), format_number(c.k)),
        MFB_FIELD("oracle", "k_prime", c.k_prime = to_double(v), format_number(c.k_prime)),
        MFB_FIELD("oracle", "z_mode", c.z_mode = enum_value(parse_z_mode, v), to_string(c.z_mode)),
        MFB_FIELD("oracle", "girsanov_moment", c.girsanov_moment = to_positive(v),
                  format_number(c.girsanov_moment)),
        MFB_FIELD("oracle", "variation_p", c.variation_p = to_positive(v), format_number(c.variation_p)),
        MFB_FIELD("oracle", "moment_limit", c.moment_limit = to_positive(v), format_number(c.moment_limit)),
    };
    return table;
}

#undef MFB_FIELD

const Field* find_field(std::string_view section, std::string_view key) {
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) return &f;
    }
    return nullptr;
}

bool known_section(std::string_view section) {
    for (const auto& f : fields()) {
        if (f.section == section) return true;
    }
    return false;
}

[[noreturn]] void parse_error(std::string_view source, std::size_t line, const std::string& what) {
    std::string msg(source);
    if (line) msg += ":" + std::to_string(line);
    throw Error(ErrorCode::parse_error, msg + ": " + what);
}

void require_length(std::string_view source, const std::vector<double>& v, std::size_t n, const char* key) {
    if (!v.empty() && v.size() != n) {
        parse_error(source, 0, std::string("key '") + key + "' needs " + std::to_string(n) + " entries, got " +
                                   std::to_string(v.size()));
    }
}

void resolve_defaults(RunConfig& c, const std::set<std::string>& given, std::string_view source) {
    auto has = [&](const char* k) { return given.count(k) > 0; };

    if (c.kernel.kind == KernelKind::coulomb && !has("kernel.delta")) {
        c.kernel.delta = c.delta_factor * std::pow(static_cast<double>(c.n), -1.0 / static_cast<double>(c.d));
    }
    if (!has("sim.grid")) {
        c.grid = (!c.kernel.is_zero() && c.kernel.kappa > 0.0) ? GridKind::graded : GridKind::uniform;
    }
    if (c.grid == GridKind::uniform) {
        if (has("sim.gamma") && c.gamma != 1.0) parse_error(source, 0, "key 'gamma' only applies to graded grids");
        c.gamma = 1.0;
    } else if (!has("sim.gamma")) {
        c.gamma = 2.0;
    }
    if (!has("oracle.probe_times")) {
        c.probe_times.clear();
        const int count = 8;
        for (int i = 0; i < count; ++i) {
            c.probe_times.push_back(c.T * std::pow(1e-3, 1.0 - static_cast<double>(i) / (count - 1)));
        }
        c.probe_times.back() = c.T;
    }
    if (!has("estimator.phi_offset") && !has("estimator.phi_scale")) {
        c.phi.offset.assign(c.d, 0.0);
        c.phi.offset[0] = 1.0;
    }

    require_length(source, c.drift.offset, c.d, "offset");
    require_length(source, c.drift.matrix, c.d * c.d, "matrix");
    require_length(source, c.diffusion.matrix, c.d * c.d, "matrix");
    require_length(source, c.f.direction, c.d, "f_direction");
    require_length(source, c.f.center, c.d, "f_center");
    require_length(source, c.phi.offset, c.d, "phi_offset");
    require_length(source, c.phi.center, c.d, "phi_center");
    for (double t : c.probe_times) {
        if (t > c.T) parse_error(source, 0, "probe time " + format_number(t) + " exceeds T");
    }
    if (!(c.p > 1.0)) parse_error(source, 0, "key 'p' must exceed 1");

    try {
        c.kernel.check();
        c.law.check(c.d);
        make_coefficients(c.d, c.drift, c.diffusion);
        make_grid(c.T, c.steps, c.grid, c.gamma);
    } catch (const Error& e) {
        throw Error(e.code(), std::string(source) + ": " + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

TimeGrid RunConfig::make_time_grid() const { return make_grid(T, steps, grid, gamma); }

AssumptionParams RunConfig::assumption_params() const {
    AssumptionParams a;
    a.d = static_cast<int>(d);
    a.T = T;
    a.kappa = kernel.kappa;
    a.beta = kernel.beta;
    a.k = k;
    a.k_prime = k_prime;
    a.p = p;
    return a;
}

Experiment RunConfig::experiment() const {
    Experiment e;
    e.coeffs = make_coefficients(d, drift, diffusion);
    e.kernel = kernel;
    e.law = law;
    e.grid = make_time_grid();
    e.n = n;
    e.seed = seed;
    e.f = f;
    e.phi = phi;
    e.beta = beta;
    e.mode = mode;
    return e;
}

RunConfig parse_config_text(std::string_view text, std::string_view source) {
    RunConfig config;
    std::set<std::string> given;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto comment = line.find_first_of("#;");
        if (comment != std::string_view::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') parse_error(source, line_no, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_section(section)) parse_error(source, line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) parse_error(source, line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (section.empty()) parse_error(source, line_no, "key '" + key + "' appears before any section");
        const Field* field = find_field(section, key);
        if (!field) parse_error(source, line_no, "unknown key '" + key + "' in section [" + section + "]");
        if (!given.insert(section + "." + key).second) {
            parse_error(source, line_no, "duplicate key '" + key + "' in section [" + section + "]");
        }
        try {
            field->set(config, value);
        } catch (const BadValue& bad) {
            parse_error(source, line_no, "key '" + key + "': " + bad.why);
        }
    }
    resolve_defaults(config, given, source);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    return parse_config_text(read_file(path), path.string());
}

ValidationReport validate_config(const RunConfig& config) {
    return validate_assumptions(config.assumption_params(), config.kernel);
}

RunConfig parse_config(const std::filesystem::path& path) {
    RunConfig config = load_config(path);
    const ValidationReport report = validate_config(config);
    if (!report.all_passed()) {
        std::string msg = path.string() + ": assumption checks failed:";
        for (const auto* check : report.failures()) {
            msg += "\n  " + check->name + ": " + format_number(check->value) + " " + check->relation + " " +
                   format_number(check->bound) + " does not hold";
        }
        throw Error(ErrorCode::validation_error, msg);
    }
    return config;
}

std::string canonical_text(const RunConfig& config) {
    std::string out;
    for (const auto& f : fields()) out += f.section + "." + f.key + "=" + f.get(config) + "\n";
    return out;
}

std::string config_digest(const RunConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mfb
