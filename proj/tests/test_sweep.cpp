#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "imsim/report.hpp"
#include "imsim/sweep.hpp"

using namespace imsim;

namespace {

HierarchyConfig tiny_base() {
    HierarchyConfig cfg;
    cfg.l1_size_bytes = 1024;
    cfg.l1_assoc = 4;
    cfg.llc_size_bytes = 4096;
    cfg.llc_assoc = 4;
    cfg.mem_size_bytes = 1 << 16;
    cfg.k_max_dirty = 3;
    cfg.dbt_entries = 2;
    cfg.wbq_entries = 1;
    cfg.wc_bits = 4;
    cfg.e_capacitor_nj = 2.8;
    return cfg;
}

std::vector<AccessRecord> sweep_trace() {
    SyntheticSpec spec;
    spec.record_count = 2000;
    spec.working_set_bytes = 1 << 15;
    spec.write_fraction = 0.5;
    spec.seed = 3;
    return generate(spec);
}

} // namespace

TEST_CASE("all (M, N) splits of K") {
    auto pairs = SweepSpec::all_pairs(4);
    REQUIRE(pairs.size() == 4);
    CHECK(pairs[0] == std::pair<uint32_t, uint32_t>{1, 3});
    CHECK(pairs[3] == std::pair<uint32_t, uint32_t>{4, 0});
    CHECK(SweepSpec::all_pairs(16).size() == 16);
}

TEST_CASE("sweep spec parsing and defaults") {
    std::istringstream in(
        "# design space\n"
        "k = 4\n"
        "m_n = 1:3, 2:2\n"
        "policy = lfw, lrw\n"
        "br = on, off\n"
        "failures = 0, 3\n");
    SweepSpec spec = parse_sweep_spec(in);
    spec.base = tiny_base();
    CHECK(spec.k_values == std::vector<uint32_t>{4});
    CHECK(spec.mn_pairs.size() == 2);
    CHECK(spec.failure_counts == std::vector<uint64_t>{0, 3});
    CHECK(spec.wc_bits == std::vector<uint32_t>{6}); // defaulted before base assignment

    std::istringstream bad("m_n = 12\n");
    CHECK_THROWS_AS(parse_sweep_spec(bad), ConfigError);
    std::istringstream unknown("frobnicate = 1\n");
    CHECK_THROWS_AS(parse_sweep_spec(unknown), ConfigError);
}

TEST_CASE("expansion is the filtered cartesian product") {
    SweepSpec spec;
    spec.base = tiny_base();
    spec.k_values = {4};
    spec.mn_pairs = {{1, 3}, {2, 2}, {3, 3}}; // last one is inconsistent
    spec.wc_bits = {4};
    spec.policies = {Policy::LFW, Policy::LRW};
    spec.br_enabled = {true, false};
    spec.failure_counts = {0, 3};
    ExpandResult ex = expand(spec);
    // 2 valid pairs x (LFW with 1 wc + LRW collapsing to wc 0) x 2 br x 2 failures
    CHECK(ex.points.size() == 16);
    CHECK(ex.filtered == 1);

    std::set<std::string> labels;
    for (const auto& p : ex.points) {
        labels.insert(p.label);
        CHECK(p.config.k_max_dirty == 4);
        CHECK(p.config.dbt_entries + p.config.wbq_entries == 4);
        CHECK_NOTHROW(p.config.validate());
    }
    CHECK(labels.size() == 16); // labels are unique
    CHECK(labels.count("K4_M1_N3_WC4_lfw_br1_f0") == 1);
    CHECK(labels.count("K4_M2_N2_WC0_lrw_br0_f3") == 1);
}

TEST_CASE("auto pairs over K = 16 give the full split family") {
    SweepSpec spec;
    spec.base = tiny_base();
    spec.base.l1_size_bytes = 2048; // 32 blocks >= K
    spec.k_values = {16};
    spec.wc_bits = {6};
    spec.policies = {Policy::LFW, Policy::LRW};
    spec.br_enabled = {true, false};
    spec.failure_counts = {0, 5, 20};
    ExpandResult ex = expand(spec);
    CHECK(ex.points.size() == 16 * 2 * 2 * 3);
    // The base capacitor covers K = 3; expansion raises it to cover K = 16.
    for (const auto& p : ex.points)
        CHECK(p.config.e_capacitor_nj >= 0.542 + 16 * 0.542);
}

TEST_CASE("empty expansion is an error") {
    SweepSpec spec;
    spec.base = tiny_base();
    CHECK_THROWS_AS(expand(spec), ConfigError);
    spec.k_values = {4};
    spec.mn_pairs = {{1, 1}}; // filtered out
    spec.wc_bits = {4};
    spec.policies = {Policy::LFW};
    spec.br_enabled = {true};
    spec.failure_counts = {0};
    CHECK_THROWS_AS(expand(spec), ConfigError);
}

TEST_CASE("baseline architectures") {
    HierarchyConfig base = tiny_base();
    HierarchyConfig b1 = baseline_config(BaselineId::Baseline1, base);
    CHECK(b1.write_policy == WritePolicy::WriteThrough);
    CHECK(b1.l1_size_bytes == 32 * 1024);
    CHECK_FALSE(b1.dbt_enabled);
    CHECK_FALSE(b1.br_enabled);

    HierarchyConfig b2 = baseline_config(BaselineId::Baseline2, base);
    CHECK(b2.write_policy == WritePolicy::WriteBack);
    CHECK(b2.l1_size_bytes == 32 * 1024);
    CHECK_FALSE(b2.dbt_enabled);

    HierarchyConfig b3 = baseline_config(BaselineId::Baseline3, base);
    CHECK(b3.l1_size_bytes == 4 * 1024);
    CHECK(b3.write_policy == WritePolicy::WriteBack);

    HierarchyConfig prop = baseline_config(BaselineId::Proposed, base);
    CHECK(prop.dbt_enabled);
    CHECK(prop.br_enabled == base.br_enabled);
}

TEST_CASE("run_sweep pairs every run with a baseline under the same schedule") {
    SweepSpec spec;
    spec.base = tiny_base();
    spec.k_values = {3};
    spec.wc_bits = {4};
    spec.policies = {Policy::LFW};
    spec.br_enabled = {true};
    spec.failure_counts = {0, 4};
    auto trace = sweep_trace();
    auto results = run_sweep(spec, trace, 4);
    REQUIRE(results.size() == 3 * 2); // pairs (1,2) (2,1) (3,0) x 2 failure counts

    for (const auto& r : results) {
        CHECK(r.stats.total_cycles > 0);
        CHECK(r.baseline_stats.total_cycles > 0);
        if (r.point.failures == 0) CHECK(r.stats.backups_performed == 0);
        else CHECK(r.stats.backups_performed == r.point.failures);
    }
    // Same failure count implies the identical shared baseline run.
    CHECK(results[0].baseline_stats.total_cycles == results[2].baseline_stats.total_cycles);

    SUBCASE("results and ranking serialize deterministically") {
        std::ostringstream csv1, csv2, rank1, rank2;
        write_results_csv(csv1, results);
        write_results_csv(csv2, results);
        write_ranking(rank1, results);
        write_ranking(rank2, results);
        CHECK(csv1.str() == csv2.str());
        CHECK(rank1.str() == rank2.str());

        // header + one run row + one paired baseline row per result
        std::istringstream count(csv1.str());
        std::string line;
        size_t lines = 0;
        while (std::getline(count, line)) ++lines;
        CHECK(lines == 1 + 2 * results.size());
    }

    SUBCASE("ranking is ascending in the metric") {
        auto ranked = rank(results, RankMetric::TotalEnergy);
        for (size_t i = 1; i < ranked.size(); ++i)
            CHECK(ranked[i - 1]->stats.total_energy_nj() <=
                  ranked[i]->stats.total_energy_nj());
    }

    SUBCASE("the report renders one SVG per metric family") {
        std::ostringstream csv;
        write_results_csv(csv, results);
        std::istringstream in(csv.str());
        CsvTable table = read_csv(in);
        CHECK(table.column("label") == 0);
        CHECK(table.rows.size() == 2 * results.size());

        auto dir = std::filesystem::temp_directory_path() / "imsim_report_test";
        std::filesystem::create_directories(dir);
        auto written = emit_report(table, dir.string(), results[0].point.label);
        REQUIRE(written.size() == 3);
        for (const auto& p : written) {
            CHECK(std::filesystem::file_size(p) > 200);
            std::filesystem::remove(p);
        }
        std::filesystem::remove(dir);
    }
}

TEST_CASE("csv fields with commas are quoted") {
    std::istringstream in("label,x\n\"a,b\",1\n");
    CsvTable t = read_csv(in);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0] == "a,b");
    CHECK(t.rows[0][1] == "1");
}
