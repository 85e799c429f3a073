// balmet: balanced-metric experiments on model geometries.
//
// Subcommands:
//   verify-fiber  fiber-geometry invariant suite over an (r, d) grid
//   balance       T-map balancing of E (x) L^k / Sym^d E (x) L^k over a k-range
//   balance-pe    direct balancing of O(d) (x) L^k on P(E*)
//   probe-decay   almost-balanced defect table across k with slope summary
//   report        merge run manifests into one machine-readable summary
//
// Exit codes: 0 pass, 2 numeric check failure, 3 configuration error,
// 4 convergence failure.

#include <CLI11.hpp>

#include <future>
#include <iostream>

#include "balmet/io.hpp"
#include "balmet/random.hpp"

using namespace balmet;

namespace {

struct CommonArgs {
    std::string configPath;
    std::string outDir;
    std::uint64_t seed = 0;
    bool seedSet = false;
    int jobs = 1;
    double tol = -1.0;   // -1: take from config/default
    int maxIter = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.configPath, "flat key = value config file");
    cmd->add_option("--out", args.outDir, "output directory for artifacts");
    cmd->add_option("--seed", args.seed, "seed for any stochastic quadrature")
        ->each([&args](const std::string&) { args.seedSet = true; });
    cmd->add_option("--jobs", args.jobs, "parallel workers for independent k-runs");
    cmd->add_option("--tol", args.tol, "balance residual tolerance");
    cmd->add_option("--max-iter", args.maxIter, "iteration cap for the T-map");
}

Config load_config(const CommonArgs& args) {
    Config cfg;
    if (!args.configPath.empty()) cfg = parse_config(read_file(args.configPath));
    if (args.seedSet) cfg.values["run.seed"] = std::to_string(args.seed);
    if (args.tol > 0) cfg.values["balance.tol"] = fmt17(args.tol);
    if (args.maxIter > 0) cfg.values["balance.maxIter"] = std::to_string(args.maxIter);
    if (args.jobs > 1) cfg.values["run.jobs"] = std::to_string(args.jobs);
    return cfg;
}

void record_inputs(RunManifest& manifest, const CommonArgs& args, const Config& cfg) {
    if (!args.configPath.empty())
        manifest.add_input_hash("config", read_file(args.configPath));
    const std::string modelDir = cfg.get("model.dir", "");
    if (!modelDir.empty())
        for (const char* name : {"manifest.json", "mesh.txt", "sections.txt", "metric.txt"})
            manifest.add_input_hash(std::string("model/") + name,
                                    read_file(fs::path(modelDir) / name));
}

QuadScheme scheme_from(const Config& cfg) {
    const std::string s = cfg.get("fiber.scheme", "product");
    if (s == "product") return QuadScheme::Product;
    if (s == "mc" || s == "montecarlo") {
        if (!cfg.has("run.seed"))
            throw std::runtime_error("config: fiber.scheme = mc requires a seed (--seed)");
        return QuadScheme::MonteCarlo;
    }
    throw std::runtime_error("config: unknown fiber.scheme '" + s + "'");
}

std::vector<int> degrees_from(const Config& cfg) {
    std::vector<int> deg;
    std::istringstream in(cfg.get("model.degrees", "1,1"));
    std::string piece;
    while (std::getline(in, piece, ',')) deg.push_back(std::stoi(piece));
    if (deg.empty()) throw std::runtime_error("config: empty model.degrees");
    return deg;
}

Model model_for_k(const Config& cfg, int k) {
    ModelSpec spec;
    const std::string kind = cfg.get("model.kind", "p1-split");
    spec.k = k;
    spec.meshSize = cfg.get_int("model.meshSize", 0);
    if (kind == "p1-split") {
        spec.kind = ModelKind::P1Split;
        spec.degrees = degrees_from(cfg);
        Model base = gen_p1_bundle(spec);
        const int d = cfg.get_int("model.d", 1);
        return d > 1 ? sym_sections(base, d) : base;
    }
    if (kind == "torus-line") {
        spec.kind = ModelKind::TorusLine;
        spec.tau = Complex(cfg.get_double("model.tau.re", 0.0),
                           cfg.get_double("model.tau.im", 1.0));
        spec.d0 = cfg.get_int("model.d0", 1);
        return gen_torus_line(spec);
    }
    throw std::runtime_error("config: unknown model.kind '" + kind + "'");
}

BalanceOptions balance_opts(const Config& cfg) {
    BalanceOptions o;
    o.tol = cfg.get_double("balance.tol", 1e-10);
    o.maxIter = cfg.get_int("balance.maxIter", 2000);
    o.damping = cfg.get_double("balance.damping", 0.0);
    if (o.tol <= 0) throw std::runtime_error("config: balance.tol must be positive");
    if (o.maxIter < 1) throw std::runtime_error("config: balance.maxIter must be >= 1");
    return o;
}

struct CheckRow {
    int r, d;
    std::string name;
    double measured;
    double threshold;
    bool pass;
};

// ---------------------------------------------------------------------------
// verify-fiber
// ---------------------------------------------------------------------------

int cmd_verify_fiber(const CommonArgs& args) {
    Config cfg = load_config(args);
    RunManifest manifest(args.outDir.empty() ? "runs/verify-fiber" : args.outDir);
    manifest.set_config(cfg);
    record_inputs(manifest, args, cfg);
    const auto t0 = std::chrono::steady_clock::now();

    const int rMax = cfg.get_int("verify.rMax", 3);
    const int dMax = cfg.get_int("verify.dMax", 3);
    const int trials = cfg.get_int("verify.trials", 5);
    const QuadScheme scheme = scheme_from(cfg);
    Rng rng(static_cast<std::uint64_t>(cfg.get_int("run.seed", 1)));

    std::vector<CheckRow> rows;
    auto push = [&rows](int r, int d, const std::string& n, double m, double thr) {
        rows.push_back({r, d, n, m, thr, m <= thr});
    };

    for (int r = 1; r <= rMax; ++r) {
        for (int d = 1; d <= dMax; ++d) {
            const int level = cfg.get_int("fiber.level", std::max(2 * d + 2, 6));
            try {
                auto rule = fs_quadrature(r, level, scheme,
                                          static_cast<std::uint64_t>(cfg.get_int("run.seed", 1)));
                push(r, d, "mass", std::abs(rule.total_mass() - fiber_volume(r)) / fiber_volume(r),
                     1e-10);
                push(r, d, "moments", r == 1 ? 0.0 : certify_rule(rule, std::min(level, 2 * d + 2)),
                     scheme == QuadScheme::Product ? 1e-10 : 5e-2);

                const double cEmp = c_constant(r, d, rule);
                const double cRef = c_constant_closed_form(r, d);
                push(r, d, "cConstant", std::abs(cEmp - cRef) / cRef, 1e-9);

                double gramDev = 0.0;
                for (int t = 0; t < trials; ++t) {
                    auto h = random_pd_metric(rng, r, 10.0);
                    auto fg = fiber_gram(h, d, rule);
                    Matrix expect = cRef * sym_power_gram(h.entries(), d);
                    gramDev = std::max(gramDev, (fg.entries() - expect).cwiseAbs().maxCoeff() /
                                                    expect.cwiseAbs().maxCoeff());
                }
                push(r, d, "fiberGram", gramDev, 1e-6);

                double lem1 = 0.0;
                auto basis = orthonormal_sym_basis(r, d);
                for (int t = 0; t < 20; ++t) {
                    auto h = random_pd_metric(rng, r, 10.0);
                    HermMetric H = sym_power_metric(h, d);
                    Vector s = random_complex_vector(rng, basis.rank());
                    Vector u = random_complex_vector(rng, basis.rank());
                    Vector f = random_complex_vector(rng, r);
                    const Complex lhs = eval_induced_metric(H, s, u, basis, f);
                    const Complex rhs = eval_section(s, basis, f) *
                                        std::conj(eval_section(u, basis, f)) /
                                        std::pow(dual_norm_sq(h.std_form(), f), d);
                    lem1 = std::max(lem1, std::abs(lhs - rhs) / std::max(1e-30, std::abs(rhs)));
                }
                push(r, d, "lemma1", lem1, 1e-12);

                if (r > 1) {
                    auto h = random_pd_metric(rng, r, 5.0);
                    const HermMetric S = sym_power_metric(h, d);
                    const Matrix sq = hermitian_power(S.std_form(), 0.5).value;
                    Matrix X = random_hermitian_direction(rng, S.dim());
                    X -= (X.trace() / static_cast<double>(S.dim())) *
                         Matrix::Identity(S.dim(), S.dim());
                    X /= hermitian_op_norm(X);
                    std::vector<double> eps{1e-1, 1e-2, 1e-3}, defect;
                    for (double e : eps) {
                        Matrix P = sq * (Matrix::Identity(S.dim(), S.dim()) + e * X) * sq;
                        auto rep = perturbation_check(h, d, HermMetric(P.conjugate(), S.basisLabel()),
                                                      rule);
                        defect.push_back(rep.worstRatio * rep.epsilon);
                    }
                    const double slope =
                        std::log(defect[0] / defect[2]) / std::log(eps[0] / eps[2]);
                    push(r, d, "prop1Slope", std::abs(slope - 1.0), 0.25);
                }
            } catch (const std::exception& e) {
                std::cerr << "[verify-fiber] (r=" << r << ", d=" << d << ") " << e.what()
                          << "\n";
                rows.push_back({r, d, std::string("error: ") + e.what(), 1.0, 0.0, false});
            }
        }
    }

    std::ostringstream csv;
    csv << "r,d,check,measured,threshold,pass\n";
    bool allPass = true;
    for (const auto& row : rows) {
        csv << row.r << "," << row.d << "," << row.name << "," << fmt17(row.measured) << ","
            << fmt17(row.threshold) << "," << (row.pass ? 1 : 0) << "\n";
        std::cout << (row.pass ? "PASS" : "FAIL") << "  r=" << row.r << " d=" << row.d << "  "
                  << row.name << "  measured=" << row.measured << " threshold=" << row.threshold
                  << "\n";
        allPass &= row.pass;
    }
    manifest.emit("verify_fiber.csv", csv.str());
    manifest.add_stage("verify-fiber", allPass ? "pass" : "fail",
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                           .count());
    manifest.finalize();
    return allPass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// balance
// ---------------------------------------------------------------------------

int cmd_balance(const CommonArgs& args) {
    Config cfg = load_config(args);
    RunManifest manifest(args.outDir.empty() ? "runs/balance" : args.outDir);
    manifest.set_config(cfg);
    record_inputs(manifest, args, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto kRange = parse_k_range(cfg.get("run.kRange", "4..8"));
    const BalanceOptions opts = balance_opts(cfg);
    const std::string modelDir = cfg.get("model.dir", "");
    const std::string warmStart = cfg.get("balance.warmStart", "");
    const int jobs = std::max(1, cfg.get_int("run.jobs", 1));

    struct KOut {
        int k;
        BalanceResult res;
        int N;
    };
    auto runK = [&](int k) {
        Model model = modelDir.empty() ? model_for_k(cfg, k) : load_model_dir(modelDir);
        BalanceOptions o = opts;
        if (!warmStart.empty()) o.start = read_matrix(warmStart);
        return KOut{k, balance_model(model, o), model.sample.N};
    };

    std::vector<KOut> outs;
    for (size_t i = 0; i < kRange.size(); i += jobs) {
        std::vector<std::future<KOut>> batch;
        for (size_t j = i; j < std::min(kRange.size(), i + jobs); ++j)
            batch.push_back(std::async(std::launch::async, runK, kRange[j]));
        for (auto& f : batch) outs.push_back(f.get());
    }

    std::ostringstream csv;
    csv << "k,N,iterations,residual,converged\n";
    int failures = 0;
    for (const auto& out : outs) {
        const auto& rep = out.res.report;
        csv << out.k << "," << out.N << "," << rep.iterations << ","
            << fmt17(rep.residualHistory.back()) << "," << (rep.converged ? 1 : 0) << "\n";
        const std::string tag = "k" + std::to_string(out.k);
        manifest.emit(tag + "_gram.txt", matrix_to_text(out.res.gram.entries()));
        manifest.emit(tag + "_report.json", balance_report_json(rep).dump(2) + "\n");
        std::cout << (rep.converged ? "PASS" : "FAIL") << "  k=" << out.k
                  << " iterations=" << rep.iterations
                  << " residual=" << rep.residualHistory.back() << "\n";
        if (!rep.converged) ++failures;
    }
    manifest.emit("balance.csv", csv.str());
    manifest.add_stage("balance", failures == 0 ? "pass" : "partial",
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                           .count());
    manifest.finalize();
    return failures == static_cast<int>(outs.size()) ? 4 : 0;
}

// ---------------------------------------------------------------------------
// balance-pe
// ---------------------------------------------------------------------------

int cmd_balance_pe(const CommonArgs& args) {
    Config cfg = load_config(args);
    RunManifest manifest(args.outDir.empty() ? "runs/balance-pe" : args.outDir);
    manifest.set_config(cfg);
    record_inputs(manifest, args, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto kRange = parse_k_range(cfg.get("run.kRange", "6"));
    const BalanceOptions opts = balance_opts(cfg);
    const std::string modeName = cfg.get("pe.volumeMode", "product");
    const VolumeMode mode =
        modeName == "induced" ? VolumeMode::Induced : VolumeMode::Product;
    if (modeName != "induced" && modeName != "product")
        throw std::runtime_error("config: pe.volumeMode must be product or induced");

    std::ostringstream csv;
    csv << "k,N,iterations,residual,converged,distToAlmostBalanced\n";
    int failures = 0;
    for (int k : kRange) {
        Model sym = model_for_k(cfg, k);
        const int level = cfg.get_int("fiber.level", 2 * sym.sample.d);
        RuledMesh ruled = build_ruled_mesh(sym, level);

        BalanceOptions base = opts;
        auto bal = balance_model(sym, base);
        if (!bal.report.converged) {
            std::cout << "FAIL  k=" << k << " (base balance did not converge)\n";
            ++failures;
            continue;
        }
        SymClosure almost = fs_closure(sym, bal.gram);
        auto pe = pe_balance_iterate(sym, ruled, almost, opts, mode);

        // Distance between the direct balanced metric and the projectivized
        // almost-balanced metric, sup over nodes, modulo one global scale.
        const auto basisD = orthonormal_sym_basis(ruled.rE, sym.sample.d);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        int node = 0;
        for (int p = 0; p < ruled.base.size(); ++p) {
            const auto& pt = ruled.base.points[p];
            const Matrix mono = fiber_monomials(ruled, basisD, p);
            const Eigen::VectorXd w = hat_weights(almost.Hk(pt.chart, pt.z), mono);
            for (int q = 0; q < ruled.fiberRule.count(); ++q, ++node) {
                const double ratio = std::real(pe.metric[node](0, 0)) / w(q);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
        const double dist = (hi - lo) / (hi + lo);
        csv << k << "," << sym.sample.N << "," << pe.report.iterations << ","
            << fmt17(pe.report.residualHistory.back()) << ","
            << (pe.report.converged ? 1 : 0) << "," << fmt17(dist) << "\n";
        const std::string tag = "k" + std::to_string(k);
        manifest.emit(tag + "_pe_gram.txt", matrix_to_text(pe.gram.entries()));
        manifest.emit(tag + "_pe_report.json", balance_report_json(pe.report).dump(2) + "\n");
        std::cout << (pe.report.converged ? "PASS" : "FAIL") << "  k=" << k
                  << " iterations=" << pe.report.iterations
                  << " residual=" << pe.report.residualHistory.back() << " dist=" << dist
                  << "\n";
        if (!pe.report.converged) ++failures;
    }
    manifest.emit("balance_pe.csv", csv.str());
    manifest.add_stage("balance-pe", failures == 0 ? "pass" : "partial",
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                           .count());
    manifest.finalize();
    return failures == static_cast<int>(kRange.size()) ? 4 : 0;
}

// ---------------------------------------------------------------------------
// probe-decay
// ---------------------------------------------------------------------------

int cmd_probe_decay(const CommonArgs& args) {
    Config cfg = load_config(args);
    RunManifest manifest(args.outDir.empty() ? "runs/probe-decay" : args.outDir);
    manifest.set_config(cfg);
    record_inputs(manifest, args, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.get("decay.autoRun", "true") == "false")
        throw std::runtime_error(
            "probe-decay: no balance artifacts supplied and auto-run disabled; run 'balmet "
            "balance' first or set decay.autoRun = true");

    const auto kRange = parse_k_range(cfg.get("run.kRange", "4..12"));
    const BalanceOptions opts = balance_opts(cfg);
    const int window = cfg.get_int("decay.window", 4);
    const VolumeMode mode =
        cfg.get("pe.volumeMode", "product") == "induced" ? VolumeMode::Induced
                                                         : VolumeMode::Product;
    int level = cfg.get_int("fiber.level", 0);

    auto make = [&](int k) { return model_for_k(cfg, k); };
    if (level == 0) level = 2 * cfg.get_int("model.d", 1);
    auto rep = decay_probe(make, kRange, level, opts, mode, window);

    manifest.emit("decay.csv", decay_csv(rep));
    json summary;
    summary["cTarget"] = rep.cTarget;
    summary["topHalfStrictlyDecreasing"] = rep.topHalfStrictlyDecreasing;
    summary["topWindowSlope"] = rep.topWindowSlope;
    int notConverged = 0;
    for (const auto& row : rep.rows) notConverged += row.converged ? 0 : 1;
    summary["rowsNotConverged"] = notConverged;
    manifest.emit("decay_summary.json", summary.dump(2) + "\n");
    for (const auto& row : rep.rows)
        std::cout << (row.converged ? "ok  " : "FLAG") << "  k=" << row.k << " N=" << row.N
                  << " D=" << row.D << " Dnorm=" << row.Dnorm << " opNormM=" << row.opNormM
                  << " slope=" << row.slope << "\n";
    std::cout << "top-half strictly decreasing: " << rep.topHalfStrictlyDecreasing
              << ", top-window slope: " << rep.topWindowSlope << "\n";
    manifest.add_stage("probe-decay", notConverged == 0 ? "pass" : "partial",
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                           .count());
    manifest.finalize();
    return notConverged == static_cast<int>(rep.rows.size()) ? 4 : 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(const CommonArgs& args) {
    const fs::path root = args.outDir.empty() ? "runs" : args.outDir;
    json summary = merge_run_manifests(root);  // throws before any output on corruption
    atomic_write(root / "summary.json", summary.dump(2) + "\n");
    std::ostringstream csv;
    csv << "manifest,csvRows\n";
    for (const auto& run : summary["runs"])
        csv << run["manifest"].get<std::string>() << "," << run["csvRows"] << "\n";
    atomic_write(root / "summary.csv", csv.str());
    std::cout << "merged " << summary["runs"].size() << " runs, " << summary["totalCsvRows"]
              << " table rows -> " << (root / "summary.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"balanced metrics on symmetric powers over model Riemann surfaces"};
    app.require_subcommand(1);

    CommonArgs verifyArgs, balanceArgs, peArgs, decayArgs, reportArgs;
    auto* verify = app.add_subcommand("verify-fiber", "fiber-geometry invariant suite");
    add_common(verify, verifyArgs);
    auto* balance = app.add_subcommand("balance", "balance E (x) L^k over a k-range");
    add_common(balance, balanceArgs);
    auto* pe = app.add_subcommand("balance-pe", "direct balancing on P(E*)");
    add_common(pe, peArgs);
    auto* decay = app.add_subcommand("probe-decay", "almost-balanced defect decay table");
    add_common(decay, decayArgs);
    auto* report = app.add_subcommand("report", "merge run manifests into a summary");
    add_common(report, reportArgs);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cmd_verify_fiber(verifyArgs);
        if (balance->parsed()) return cmd_balance(balanceArgs);
        if (pe->parsed()) return cmd_balance_pe(peArgs);
        if (decay->parsed()) return cmd_probe_decay(decayArgs);
        if (report->parsed()) return cmd_report(reportArgs);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << "\n";
        if (what.find("config") != std::string::npos ||
            what.find("kRange") != std::string::npos ||
            what.find("manifest") != std::string::npos)
            return 3;
        if (what.find("converge") != std::string::npos) return 4;
        return 2;
    }
    return 0;
}
