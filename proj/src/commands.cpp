#include "mfb/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>

#include "mfb/csv.hpp"
#include "mfb/error.hpp"
#include "mfb/variation.hpp"

namespace mfb {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kSubcommands = {"validate",        "simulate",      "bismut",   "fd-check",
                                               "girsanov-check", "scaling-probe", "varcheck", "all"};

bool has_density(const InitialLaw& law) {
    return law.kind == LawKind::gaussian ? law.scale > 0.0 : law.kind == LawKind::uniform_box;
}

std::string num(double x) { return format_number(x); }

class Run {
public:
    Run(const RunConfig& config, const fs::path& out, std::ostream& log)
        : config_(config), digest_(config_digest(config)), out_(out), log_(log) {}

    void dispatch(std::string_view sub) {
        if (sub == "validate") {
            guarded("validate", [&] { validate(); });
            return;
        }
        bool valid = false;
        guarded("validate", [&] { valid = validate(); });
        if (!valid) return;
        if (sub == "simulate") guarded("simulate", [&] { simulate(); });
        if (sub == "bismut") guarded("bismut", [&] { bismut(); });
        if (sub == "fd-check") guarded("fd-check", [&] { fd_check(); });
        if (sub == "girsanov-check") guarded("girsanov-check", [&] { girsanov(); });
        if (sub == "scaling-probe") guarded("scaling-probe", [&] { scaling(); });
        if (sub == "varcheck") guarded("varcheck", [&] { varcheck(); });
        if (sub == "all") {
            guarded("simulate", [&] { simulate(); });
            guarded("bismut", [&] { bismut(); });
            guarded("fd-check", [&] { fd_check(); });
            guarded("girsanov-check", [&] { girsanov(); });
            if (has_density(config_.law)) {
                guarded("scaling-probe", [&] { scaling(); });
            } else {
                log_ << "SKIP scaling-probe: initial law has no density\n";
            }
            guarded("varcheck", [&] { varcheck(); });
        }
    }

    CommandResult finish() {
        CommandResult result;
        result.failures = failures_;
        result.files = files_;
        result.exit_code = failures_.empty() ? 0 : 1;
        if (!failures_.empty()) result.files.push_back(write_failures(out_, digest_, failures_));
        return result;
    }

private:
    void guarded(const char* sub, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            fail(sub, to_string(e.code()), e.what());
        } catch (const std::exception& e) {
            fail(sub, "Exception", e.what());
        }
    }

    void fail(const std::string& sub, const std::string& check, const std::string& detail) {
        log_ << "FAIL " << sub << ": " << check << ": " << detail << '\n';
        failures_.push_back({sub, check, detail});
    }

    void check(const std::string& sub, const std::string& name, bool ok, const std::string& detail) {
        if (ok) {
            log_ << "PASS " << sub << ": " << name << ": " << detail << '\n';
        } else {
            fail(sub, name, detail);
        }
    }

    CsvWriter open(const std::string& name, const std::vector<std::string>& columns) {
        fs::create_directories(out_);
        files_.push_back(out_ / name);
        return CsvWriter(out_ / name, digest_, columns);
    }

    bool validate() {
        const ValidationReport report = validate_config(config_);
        for (const auto& c : report.checks) {
            const std::string detail = c.vacuous ? "not applicable"
                                                 : num(c.value) + " " + c.relation + " " + num(c.bound) +
                                                       " (margin " + num(c.margin) + ")";
            check("validate", c.name, c.passed, detail);
        }
        log_ << "validate: admissible p " << (report.p_interval.lower_is_strict() ? "> " : ">= ")
             << num(report.p_interval.lower()) << ", configured p = " << num(config_.p) << '\n';
        return report.all_passed();
    }

    void simulate() {
        const Experiment e = config_.experiment();
        const SimulationResult sim =
            simulate_mv(e.law, e.coeffs, e.kernel, e.grid, e.n, e.seed, config_.write_flow);
        const auto write_rows = [&](const std::string& name, const std::vector<double>& x) {
            std::vector<std::string> columns{"particle"};
            for (std::size_t k = 1; k <= config_.d; ++k) columns.push_back("x_" + std::to_string(k));
            CsvWriter csv = open(name, columns);
            for (std::size_t i = 0; i < e.n; ++i) {
                csv.cell(i);
                for (std::size_t k = 0; k < config_.d; ++k) csv.cell(x[i * config_.d + k]);
                csv.end_row();
            }
            csv.close();
        };
        write_rows("positions.csv", sim.ensemble.positions);
        if (sim.flow) {
            for (std::size_t m = 0; m < sim.flow->snapshots.size(); ++m) {
                write_rows("flow_" + std::to_string(m) + ".csv", sim.flow->snapshots[m]);
            }
        }
        const Estimate ptf = estimate_ptf(sim.ensemble, e.f);
        log_ << "simulate: P_T f = " << num(ptf.mean) << " +- " << num(ptf.std_error) << '\n';
    }

    const BismutEstimate& estimate() {
        if (!bismut_) {
            bismut_ = intrinsic_derivative(config_.experiment());
            bismut_->config_digest = digest_;
        }
        return *bismut_;
    }

    void bismut() {
        const BismutEstimate& b = estimate();
        CsvWriter csv = open("bismut.csv", {"quantity", "value", "std_error", "n_particles", "n_steps", "seed"});
        const std::pair<const char*, std::pair<double, double>> rows[] = {
            {"term1", {b.term1, b.se_term1}}, {"term2", {b.term2, b.se_term2}}, {"total", {b.total, b.se_total}}};
        for (const auto& [name, v] : rows) {
            csv.cell(name).cell(v.first).cell(v.second).cell(b.n_particles).cell(b.n_steps).cell(b.seed);
            csv.end_row();
        }
        csv.close();
        log_ << "bismut: total = " << num(b.total) << " +- " << num(b.se_total) << " (term1 " << num(b.term1)
             << ", term2 " << num(b.term2) << ", bound ratio " << num(b.bound_ratio) << ")\n";
        check("bismut", "finite estimate", std::isfinite(b.total) && std::isfinite(b.se_total), num(b.total));
        if (config_.kernel.is_zero()) check("bismut", "term2 vanishes for a zero kernel", b.term2 == 0.0, num(b.term2));
        if (config_.reference) {
            const double gap = std::abs(b.total - *config_.reference);
            check("bismut", "total within 3 SE of reference", gap <= 3.0 * b.se_total,
                  "|" + num(b.total) + " - " + num(*config_.reference) + "| = " + num(gap) + ", 3 SE = " +
                      num(3.0 * b.se_total));
        }
    }

    void fd_check() {
        std::vector<double> eps = config_.epsilons;
        eps.push_back(config_.fd_epsilon);
        std::sort(eps.begin(), eps.end(), std::greater<>());
        eps.erase(std::unique(eps.begin(), eps.end()), eps.end());

        const auto rows = fd_family(config_.experiment(), config_.phi, eps);
        CsvWriter csv = open("fd.csv", {"epsilon", "estimate", "std_error"});
        Estimate fd;
        for (const auto& r : rows) {
            csv.cell(r.epsilon).cell(r.estimate.mean).cell(r.estimate.std_error);
            csv.end_row();
            if (r.epsilon == config_.fd_epsilon) fd = r.estimate;
        }
        csv.close();

        const BismutEstimate& b = estimate();
        const double gap = std::abs(b.total - fd.mean);
        const double tol = 3.0 * std::hypot(b.se_total, fd.std_error);
        const bool ok = gap <= tol;
        log_ << "fd-check: " << (ok ? "PASS" : "FAIL") << " bismut " << num(b.total) << " +- " << num(b.se_total)
             << ", fd(" << num(config_.fd_epsilon) << ") " << num(fd.mean) << " +- " << num(fd.std_error)
             << ", |diff| " << num(gap) << " vs 3 combined SE " << num(tol) << '\n';
        if (!ok) fail("fd-check", "bismut agrees with finite differences", num(gap) + " > " + num(tol));
    }

    void girsanov() {
        const auto report =
            girsanov_order_check(config_.experiment(), config_.phi, config_.epsilons, config_.girsanov_moment);
        CsvWriter csv = open("girsanov.csv", {"epsilon", "mean_weight", "mean_abs_dev", "std_error"});
        for (const auto& r : report.rows) {
            csv.cell(r.epsilon).cell(r.mean_weight.mean).cell(r.mean_abs_dev.mean).cell(r.mean_weight.std_error);
            csv.end_row();
            const double gap = std::abs(r.mean_weight.mean - 1.0);
            check("girsanov-check", "mean weight 1 at eps=" + num(r.epsilon), gap <= 3.0 * r.mean_weight.std_error,
                  "|" + num(r.mean_weight.mean) + " - 1| vs 3 SE " + num(3.0 * r.mean_weight.std_error));
        }
        csv.close();
        if (report.degenerate) {
            log_ << "girsanov-check: every weight is exactly 1 (degenerate, no slope)\n";
            return;
        }
        const double n = report.moment;
        check("girsanov-check", "order of E|R-1|^" + num(n), report.slope >= n - 0.2 && report.slope <= n + 0.2,
              "slope " + num(report.slope) + " in [" + num(n - 0.2) + ", " + num(n + 0.2) + "]");
    }

    void scaling() {
        const auto report = kernel_scaling_probe(config_.experiment(), config_.assumption_params(), config_.z_mode,
                                                 config_.probe_times);
        CsvWriter csv = open("scaling.csv", {"t", "value", "std_error", "theoretical_exponent"});
        bool all_zero = true;
        bool finite = true;
        for (const auto& r : report.rows) {
            csv.cell(r.t).cell(r.value).cell(r.std_error).cell(report.theoretical_exponent);
            csv.end_row();
            all_zero = all_zero && r.value == 0.0;
            finite = finite && std::isfinite(r.value);
        }
        csv.close();
        check("scaling-probe", "finite values", finite, std::to_string(report.rows.size()) + " probe times");
        if (config_.kernel.is_zero()) {
            check("scaling-probe", "zero kernel gives zero moments", all_zero, "");
            return;
        }
        log_ << "scaling-probe: " << to_string(report.mode) << " z, envelope C = " << num(report.envelope_constant)
             << " (the fixed-z grid gives a lower bound on the sup over z)\n";
        check("scaling-probe", "slope not below exponent - 0.3", report.slope >= report.theoretical_exponent - 0.3,
              "slope " + num(report.slope) + ", exponent " + num(report.theoretical_exponent));
    }

    void varcheck() {
        const Experiment e = config_.experiment();
        std::vector<double> eps = config_.epsilons;
        std::sort(eps.begin(), eps.end(), std::greater<>());
        const auto report = fd_variation_check(e, config_.phi, eps, config_.variation_p);
        CsvWriter csv = open("varcheck.csv", {"epsilon", "sup_error_p", "std_error"});
        for (const auto& r : report.rows) {
            csv.cell(r.epsilon).cell(r.sup_error_p.mean).cell(r.sup_error_p.std_error);
            csv.end_row();
        }
        csv.close();
        if (report.at_rounding_level) {
            log_ << "varcheck: every error is at rounding level (the perturbation is a rigid shift)\n";
        }
        for (std::size_t i = 1; i < report.rows.size() && !report.at_rounding_level; ++i) {
            const auto& a = report.rows[i - 1].sup_error_p;
            const auto& b = report.rows[i].sup_error_p;
            const double slack = std::hypot(a.std_error, b.std_error);
            const bool ok = report.degenerate || b.mean < a.mean + slack;
            check("varcheck", "error decreases at eps=" + num(report.rows[i].epsilon), ok,
                  num(b.mean) + " vs " + num(a.mean) + " + " + num(slack));
        }
        if (!report.degenerate && !report.at_rounding_level) log_ << "varcheck: fitted order " << num(report.order) << '\n';

        Ensemble start = init_ensemble(e.law, e.n, e.coeffs.dim, e.seed);
        init_variations(start, config_.phi);
        const VariationRun run = run_variation(std::move(start), e.coeffs, e.kernel, e.grid);
        const MomentReport moments = moment_probe(run.history, config_.variation_p);
        CsvWriter mcsv = open("moments.csv", {"t", "mean_abs_v_pow_p", "ratio_to_initial"});
        for (const auto& r : moments.rows) {
            mcsv.cell(r.t).cell(r.mean_abs_v_pow_p).cell(r.ratio_to_initial);
            mcsv.end_row();
        }
        mcsv.close();
        check("varcheck", "variation moment bounded",
              std::isfinite(moments.sup_ratio) && moments.sup_ratio <= config_.moment_limit,
              "sup ratio " + num(moments.sup_ratio) + " <= " + num(config_.moment_limit));
    }

    const RunConfig& config_;
    std::string digest_;
    fs::path out_;
    std::ostream& log_;
    std::vector<Failure> failures_;
    std::vector<fs::path> files_;
    std::optional<BismutEstimate> bismut_;
};

}  // namespace

const std::vector<std::string>& subcommand_names() { return kSubcommands; }

bool is_subcommand(std::string_view name) {
    return std::find(kSubcommands.begin(), kSubcommands.end(), name) != kSubcommands.end();
}

fs::path write_failures(const fs::path& out_dir, const std::string& digest, const std::vector<Failure>& failures) {
    fs::create_directories(out_dir);
    const fs::path path = out_dir / "failures.csv";
    CsvWriter csv(path, digest, {"subcommand", "check", "detail"});
    for (const auto& f : failures) {
        csv.cell(f.subcommand).cell(f.check).cell(f.detail);
        csv.end_row();
    }
    csv.close();
    return path;
}

CommandResult run_command(std::string_view subcommand, const RunConfig& config, const fs::path& out_dir,
                          std::ostream& log) {
    if (!is_subcommand(subcommand)) {
        throw Error(ErrorCode::invalid_argument, "unknown subcommand '" + std::string(subcommand) + "'");
    }
    Run run(config, out_dir, log);
    run.dispatch(subcommand);
    return run.finish();
}

}  // namespace mfb
