// Command-line front end: single runs, sweeps, trace generation, reports.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "imsim/engine.hpp"
#include "imsim/oracle.hpp"
#include "imsim/report.hpp"
#include "imsim/sweep.hpp"
#include "imsim/trace.hpp"

using namespace imsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitUnsafeBackup = 3;

void print_summary(std::ostream& out, const HierarchyConfig& cfg, const SimStats& s) {
    out << "# configuration\n";
    std::istringstream canon(cfg.canonical());
    std::string line;
    while (std::getline(canon, line)) out << "#   " << line << "\n";
    out << "l1: " << s.l1_reads << " reads, " << s.l1_writes << " writes, " << s.l1_hits
        << " hits, " << s.l1_misses << " misses\n";
    out << "llc: " << s.llc_reads << " reads, " << s.llc_writes << " writes\n";
    out << "pcm: " << s.pcm_reads << " reads, " << s.pcm_writes << " writes\n";
    out << "backup region: " << s.br_reads << " reads, " << s.br_writes << " writes\n";
    out << "cycles: " << s.total_cycles << " total, " << s.stall_cycles << " stalled\n";
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "energy (nJ): %.6f stable, %.6f backup, %.6f restore, %.6f total\n",
                  s.energy_stable_nj, s.energy_backup_nj, s.energy_restore_nj,
                  s.total_energy_nj());
    out << buf;
    out << "power failures: " << s.backups_performed << " backups, " << s.blocks_backed_up
        << " blocks backed up, " << s.restores_performed << " restores\n";
}

int cmd_run(const std::string& config_path, const std::string& trace_path,
            uint64_t failures_every, uint64_t failures_total, const std::string& out_prefix,
            bool verify) {
    HierarchyConfig cfg = config_path.empty() ? HierarchyConfig{} : load_config_file(config_path);
    cfg.validate();
    std::vector<AccessRecord> trace = load_trace(trace_path, cfg.mem_ops_per_instr);

    PowerSchedule sched = PowerSchedule::none();
    if (failures_every > 0) {
        sched = PowerSchedule::periodic(failures_every);
    } else if (failures_total > 0) {
        uint64_t total_instr = trace.empty() ? 0 : trace.back().instr_index + 1;
        sched = PowerSchedule::by_total_failures(failures_total, total_instr);
    }

    Engine eng(cfg, sched);
    SimStats stats;
    try {
        stats = eng.run(trace);
    } catch (const UnsafeBackupError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnsafeBackup;
    }

    print_summary(std::cout, cfg, stats);
    if (verify) {
        OracleMemory oracle = oracle_run(trace, cfg.mem_size_bytes);
        ConsistencyReport rep = check_consistency(eng.visible_memory_image(), oracle);
        if (rep.pass) {
            std::cout << "consistency: pass\n";
        } else {
            std::cout << "consistency: FAIL at address 0x" << std::hex << rep.first_divergent_addr
                      << std::dec << " (" << rep.divergent_bytes << " divergent bytes)\n";
            return 1;
        }
    }
    if (!out_prefix.empty()) {
        std::ofstream csv(out_prefix + ".csv");
        csv << stats_csv_header() << "\n"
            << stats_csv_row("run", cfg, stats.backups_performed, "run", stats, 0.0) << "\n";
        std::ofstream sum(out_prefix + ".txt");
        print_summary(sum, cfg, stats);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven simulator of an intermittently powered SRAM/STT-RAM/PCM "
                 "memory hierarchy with bounded dirty-block tracking"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Simulate one trace with one configuration");
    std::string run_config, run_trace, run_out;
    uint64_t run_every = 0, run_count = 0;
    bool run_verify = false;
    run->add_option("--config", run_config, "configuration file");
    run->add_option("--trace", run_trace, "trace file (.mtr or .mtb)")->required();
    run->add_option("--failures-every", run_every, "power failure every N instructions");
    run->add_option("--failures", run_count, "total power failures over the trace");
    run->add_option("--out", run_out, "output prefix for <prefix>.csv and <prefix>.txt");
    run->add_flag("--verify", run_verify, "check the final memory image against the oracle");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Expand and run a design-space sweep");
    std::string sweep_spec_path, sweep_out;
    unsigned sweep_threads = 0;
    sweep->add_option("--spec", sweep_spec_path, "sweep spec file")->required();
    sweep->add_option("--out", sweep_out, "output prefix for results/ranking CSV")->required();
    sweep->add_option("--threads", sweep_threads, "worker threads (default: hardware)");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic trace");
    std::string gen_out, gen_locality = "uniform";
    uint64_t gen_records = 100000, gen_ws = 1 << 20, gen_seed = 1;
    double gen_wf = 0.3, gen_mopi = 0.4;
    gen->add_option("--records", gen_records, "record count");
    gen->add_option("--write-fraction", gen_wf, "fraction of writes [0,1]");
    gen->add_option("--working-set", gen_ws, "working set size in bytes");
    gen->add_option("--locality", gen_locality,
                    "uniform | zipf:S | strided:BYTES | loop:BYTES[,BYTES...]");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--mem-ops-per-instr", gen_mopi, "memory operations per instruction");
    gen->add_option("--out", gen_out, "output file (.mtr or .mtb)")->required();

    // report
    auto* report = app.add_subcommand("report", "Render SVG plots from a results CSV");
    std::string report_csv, report_dir = ".", report_baseline;
    report->add_option("csv", report_csv, "results CSV")->required();
    report->add_option("--out", report_dir, "output directory");
    report->add_option("--baseline", report_baseline, "label of the normalization baseline row");

    // validate
    auto* validate = app.add_subcommand("validate", "Check a configuration file");
    std::string val_config;
    validate->add_option("--config", val_config, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed())
            return cmd_run(run_config, run_trace, run_every, run_count, run_out, run_verify);
        if (sweep->parsed()) {
            SweepSpec spec = load_sweep_spec(sweep_spec_path);
            if (spec.trace_path.empty())
                throw ConfigError("sweep spec needs a trace = <path> entry");
            std::vector<AccessRecord> trace =
                load_trace(spec.trace_path, spec.base.mem_ops_per_instr);
            auto results = run_sweep(spec, trace, sweep_threads);
            std::ofstream csv(sweep_out + "_results.csv");
            write_results_csv(csv, results);
            std::ofstream ranking(sweep_out + "_ranking.csv");
            write_ranking(ranking, results);
            std::cout << results.size() << " runs -> " << sweep_out << "_results.csv, "
                      << sweep_out << "_ranking.csv\n";
            return kExitOk;
        }
        if (gen->parsed()) {
            SyntheticSpec spec;
            spec.record_count = gen_records;
            spec.write_fraction = gen_wf;
            spec.working_set_bytes = gen_ws;
            spec.seed = gen_seed;
            spec.mem_ops_per_instr = gen_mopi;
            parse_locality(gen_locality, spec);
            save_trace(gen_out, generate(spec));
            std::cout << gen_records << " records -> " << gen_out << "\n";
            return kExitOk;
        }
        if (report->parsed()) {
            std::ifstream in(report_csv);
            if (!in) throw ConfigError("cannot open " + report_csv);
            CsvTable table = read_csv(in);
            std::filesystem::create_directories(report_dir);
            auto written = emit_report(table, report_dir, report_baseline);
            for (const auto& p : written) std::cout << p << "\n";
            return kExitOk;
        }
        if (validate->parsed()) {
            HierarchyConfig cfg = load_config_file(val_config);
            cfg.validate();
            std::cout << cfg.canonical();
            return kExitOk;
        }
    } catch (const UnsafeBackupError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnsafeBackup;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
