#include <doctest.h>

#include <cstdlib>
#include <random>
#include <sstream>

#include "imsim/address.hpp"
#include "imsim/config.hpp"

using namespace imsim;

TEST_CASE("derive_k basic values") {
    CHECK(derive_k(10.0, 10.0, 0.542) == 0);
    CHECK(derive_k(18.672, 10.0, 0.542) == 16); // 16 * 0.542 = 8.672 exactly
    CHECK(derive_k(18.0, 10.0, 0.542) == 14);   // floor(8.0 / 0.542)
    CHECK_THROWS_AS(derive_k(5.0, 10.0, 0.542), ConfigError);
    CHECK_THROWS_AS(derive_k(10.0, 5.0, 0.0), ConfigError);
}

TEST_CASE("derive_k monotonicity") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> cap(1.0, 100.0), ew(0.1, 2.0);
    for (int i = 0; i < 500; ++i) {
        double e_reg = 0.5;
        double c = cap(rng) + e_reg, w = ew(rng);
        uint32_t k = derive_k(c, e_reg, w);
        CHECK(derive_k(c + 1.0, e_reg, w) >= k);     // nondecreasing in capacitor
        CHECK(derive_k(c, e_reg, w + 0.05) <= k);    // nonincreasing in write energy
    }
}

TEST_CASE("backup_energy_full_l1") {
    HierarchyConfig cfg;
    cfg.l1_size_bytes = 16 * 1024;
    cfg.block_size_bytes = 64;
    cfg.energies.llc_write_nj = 0.542;
    CHECK(backup_energy_full_l1(cfg) == doctest::Approx(138.752)); // 256 blocks

    cfg.l1_size_bytes = 32 * 1024;
    CHECK(backup_energy_full_l1(cfg) == doctest::Approx(277.504)); // 512 blocks

    cfg.l1_size_bytes = 64;
    CHECK(backup_energy_full_l1(cfg) == doctest::Approx(0.542)); // single-block cache
}

TEST_CASE("address decomposition") {
    Geometry g(64, 64, 1 << 20);
    auto p0 = g.decompose(0);
    CHECK(p0.tag == 0);
    CHECK(p0.set == 0);
    CHECK(p0.offset == 0);

    auto p = g.decompose(0x1040);
    CHECK(p.offset == 0);
    CHECK(p.set == 1);
    CHECK(p.tag == 1);

    CHECK_THROWS_AS(g.decompose(1 << 20), TraceError); // addr == mem_size
}

TEST_CASE("decompose/recompose is a bijection") {
    Geometry g(64, 128, 1 << 22);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20000; ++i) {
        uint64_t addr = rng() % (1 << 22);
        CHECK(g.recompose(g.decompose(addr)) == addr);
    }
}

TEST_CASE("config validation") {
    HierarchyConfig cfg;
    cfg.mem_size_bytes = 1 << 20;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.k_max_dirty == cfg.dbt_entries + cfg.wbq_entries);

    SUBCASE("K != M + N rejected") {
        cfg.dbt_entries = 10;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("non power-of-two size rejected") {
        cfg.l1_size_bytes = 3000;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("write-through with DBT rejected") {
        cfg.write_policy = WritePolicy::WriteThrough;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.dbt_enabled = false;
        cfg.br_enabled = false;
        CHECK_NOTHROW(cfg.validate());
    }
    SUBCASE("capacitor too small for K rejected") {
        cfg.e_capacitor_nj = 5.0; // derive_k = floor((5 - 0.542)/0.542) = 8 < 16
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("LFW needs a write counter") {
        cfg.wc_bits = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.policy = Policy::LRW;
        CHECK_NOTHROW(cfg.validate());
    }
}

TEST_CASE("config parse and canonical round-trip") {
    std::istringstream in(
        "# comment\n"
        "l1_size_bytes = 16384\n"
        "policy = lrw\n"
        "llc_write_energy_nj = 0.5\n");
    HierarchyConfig cfg = parse_config(in);
    CHECK(cfg.l1_size_bytes == 16384);
    CHECK(cfg.policy == Policy::LRW);
    CHECK(cfg.energies.llc_write_nj == doctest::Approx(0.5));

    std::istringstream canon(cfg.canonical());
    HierarchyConfig again = parse_config(canon);
    CHECK(again.canonical() == cfg.canonical());
}

TEST_CASE("config parse errors carry location") {
    std::istringstream bad("l1_size_bytes 16384\n");
    try {
        parse_config(bad, "cfg");
        FAIL("missing '=' accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("cfg:1") != std::string::npos);
    }

    std::istringstream unknown("no_such_key = 3\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
}

TEST_CASE("environment overrides") {
    HierarchyConfig cfg;
    setenv("SIM_WC_BITS", "5", 1);
    apply_env_overrides(cfg);
    unsetenv("SIM_WC_BITS");
    CHECK(cfg.wc_bits == 5);
}

TEST_CASE("paper-default constants") {
    HierarchyConfig cfg = load_config_file(std::string(IMSIM_SOURCE_DIR) + "/configs/paper-default",
                                           /*apply_env=*/false);
    cfg.validate();
    CHECK(cfg.latencies.sram_read_cycles == 1);
    CHECK(cfg.latencies.sram_write_cycles == 2);
    CHECK(cfg.latencies.sttram_read_cycles == 2);
    CHECK(cfg.latencies.sttram_write_cycles == 10);
    CHECK(cfg.latencies.pcm_read_cycles == 35);
    CHECK(cfg.latencies.pcm_write_cycles == 100);
    CHECK(cfg.energies.l1_read_nj == doctest::Approx(0.006));
    CHECK(cfg.energies.l1_write_nj == doctest::Approx(0.002));
    CHECK(cfg.energies.llc_read_nj == doctest::Approx(0.123));
    CHECK(cfg.energies.llc_write_nj == doctest::Approx(0.542));
    CHECK(cfg.energies.pcm_read_nj == doctest::Approx(1.553));
    CHECK(cfg.energies.pcm_write_nj == doctest::Approx((6.927 + 6.946) / 2));
    CHECK(cfg.k_max_dirty == 16);
    CHECK(cfg.dbt_entries == 12);
    CHECK(cfg.wbq_entries == 4);
    CHECK(cfg.wc_bits == 6);
    CHECK(derive_k(cfg.e_capacitor_nj, cfg.e_reg_file_nj, cfg.energies.llc_write_nj) == 16);
}
