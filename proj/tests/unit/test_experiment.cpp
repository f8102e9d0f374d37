#include "dmimo/experiment.hpp"

#include "doctest.h"

#include <sstream>

using namespace dmimo;

namespace {

ExperimentConfig quick_config() {
    ExperimentConfig cfg;
    cfg.system.geometry.num_aps = 6;
    cfg.system.geometry.num_ues = 4;
    cfg.realizations = 3;
    cfg.seed = 5;
    cfg.workers = 2;
    cfg.sweep = {{SweepVariable::se_qos, {0.0, 4.0, 500.0}}};
    return cfg;
}

std::string long_csv(const SweepResult& r) {
    std::ostringstream os;
    r.write_long_csv(os);
    return os.str();
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("realization seeds") {
    CHECK(realization_seed(1, 0) == realization_seed(1, 0));
    CHECK(realization_seed(1, 0) != realization_seed(1, 1));
    CHECK(realization_seed(1, 0) != realization_seed(2, 0));
}

TEST_CASE("sweep is deterministic and independent of the worker count") {
    ExperimentConfig cfg = quick_config();
    const SweepResult a = run_sweep(cfg);
    cfg.workers = 1;
    const SweepResult b = run_sweep(cfg);
    CHECK(long_csv(a) == long_csv(b));
    REQUIRE(a.runs.size() == 9);
    CHECK(a.axes == std::vector<std::string>{"se_qos"});
    // Grid points share layouts.
    CHECK(a.runs[0].seed == a.runs[3].seed);
    CHECK(a.runs[0].seed != a.runs[1].seed);
}

TEST_CASE("aggregation re-derives from the long rows") {
    const SweepResult r = run_sweep(quick_config());
    const auto summary = r.aggregate();
    REQUIRE(summary.size() == 3);
    for (std::size_t p = 0; p < 3; ++p) {
        double ee = 0.0;
        int infeasible = 0;
        for (int k = 0; k < 3; ++k) {
            const RunRecord& run = r.runs[p * 3 + k];
            CHECK(run.point == summary[p].point);
            ee += run.ee;
            if (run.status == SolveStatus::infeasible) {
                ++infeasible;
                CHECK(run.ee == 0.0);
            }
        }
        CHECK(summary[p].mean_ee == doctest::Approx(ee / 3.0));
        CHECK(summary[p].infeasible == infeasible);
        CHECK(summary[p].realizations == 3);
    }
    CHECK(summary[2].infeasible == 3);
    CHECK(summary[2].mean_ee == 0.0);

    std::ostringstream mean, runtime;
    r.write_mean_csv(mean);
    r.write_runtime_csv(runtime);
    CHECK(mean.str().rfind("se_qos,realizations,infeasible,mean_ee,mean_sum_se,mean_iterations\n", 0) == 0);
    CHECK(runtime.str().rfind("se_qos,realization,runtime_s\n", 0) == 0);
    CHECK(long_csv(r).rfind("se_qos,realization,seed,status,ee,sum_se,iterations\n", 0) == 0);
}

TEST_CASE("trace run") {
    ExperimentConfig cfg = quick_config();
    const TraceRun run = convergence_trace(cfg);
    CHECK(run.trace.records.size() == static_cast<std::size_t>(run.solution.iterations) + 1);
    cfg.solver.eps = 0.5;
    CHECK(convergence_trace(cfg).solution.iterations <= run.solution.iterations);
}

TEST_CASE("robustness study covers every setting") {
    ExperimentConfig cfg = quick_config();
    cfg.sweep.clear();
    cfg.realizations = 2;
    const RobustnessResult r = robustness_study(cfg);
    CHECK(r.rows.size() == 2 * (robustness_schemes().size() + robustness_eta_inits().size()));
    CHECK(r.means("association").size() == robustness_schemes().size());
    CHECK(r.means("eta_init").size() == robustness_eta_inits().size());
    CHECK(r.relative_spread("association") >= 0.0);
}

TEST_CASE("oracle study on tiny instances") {
    ExperimentConfig cfg;
    cfg.oracle.instances = 4;
    cfg.oracle.eta_grid = 6;
    cfg.workers = 1;
    const OracleStudy s = oracle_study(cfg);
    REQUIRE(s.rows.size() == 4);
    CHECK(s.dominance_violations() == 0);
    CHECK(s.share_within(0.0) == 1.0);
    for (const OracleRow& row : s.rows) CHECK(row.optimizer_ee <= row.oracle_ee * 1.05 + 1e-9);
}

TEST_CASE("summary document") {
    ExperimentConfig cfg;
    const std::string doc = json_summary("sweep", cfg, 1.5, {{"mean_ee", 2.0}});
    CHECK(doc.find("\"command\"") != std::string::npos);
    CHECK(doc.find("mean_ee") != std::string::npos);
}

}
