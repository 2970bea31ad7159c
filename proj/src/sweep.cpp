#include "imsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace imsim {

HierarchyConfig baseline_config(BaselineId id, const HierarchyConfig& base) {
    HierarchyConfig cfg = base;
    cfg.dbt_enabled = false;
    cfg.br_enabled = false;
    switch (id) {
    case BaselineId::Baseline1:
        cfg.l1_size_bytes = 32 * 1024;
        cfg.write_policy = WritePolicy::WriteThrough;
        break;
    case BaselineId::Baseline2:
        cfg.l1_size_bytes = 32 * 1024;
        cfg.write_policy = WritePolicy::WriteBack;
        break;
    case BaselineId::Baseline3:
        cfg.l1_size_bytes = 4 * 1024;
        cfg.write_policy = WritePolicy::WriteBack;
        break;
    case BaselineId::Proposed:
        cfg.dbt_enabled = true;
        cfg.br_enabled = base.br_enabled;
        cfg.write_policy = WritePolicy::WriteBack;
        break;
    }
    return cfg;
}

std::vector<std::pair<uint32_t, uint32_t>> SweepSpec::all_pairs(uint32_t k) {
    std::vector<std::pair<uint32_t, uint32_t>> out;
    for (uint32_t m = 1; m <= k; ++m) out.emplace_back(m, k - m);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream is(v);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

} // namespace

SweepSpec parse_sweep_spec(std::istream& in, const std::string& name) {
    SweepSpec spec;
    std::string line;
    size_t lineno = 0;
    bool pairs_auto = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (size_t h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "k") {
            for (const auto& t : split_list(value)) spec.k_values.push_back(uint32_t(std::stoul(t)));
        } else if (key == "m_n") {
            if (value == "auto") {
                pairs_auto = true;
            } else {
                for (const auto& t : split_list(value)) {
                    size_t c = t.find(':');
                    if (c == std::string::npos)
                        throw ConfigError(name + ":" + std::to_string(lineno) +
                                          ": m_n pairs use M:N");
                    spec.mn_pairs.emplace_back(uint32_t(std::stoul(t.substr(0, c))),
                                               uint32_t(std::stoul(t.substr(c + 1))));
                }
            }
        } else if (key == "wc_bits") {
            for (const auto& t : split_list(value)) spec.wc_bits.push_back(uint32_t(std::stoul(t)));
        } else if (key == "policy") {
            for (const auto& t : split_list(value)) {
                if (t == "lfw") spec.policies.push_back(Policy::LFW);
                else if (t == "lrw") spec.policies.push_back(Policy::LRW);
                else throw ConfigError(name + ":" + std::to_string(lineno) + ": bad policy " + t);
            }
        } else if (key == "br") {
            for (const auto& t : split_list(value)) {
                if (t == "on" || t == "true" || t == "1") spec.br_enabled.push_back(true);
                else if (t == "off" || t == "false" || t == "0") spec.br_enabled.push_back(false);
                else throw ConfigError(name + ":" + std::to_string(lineno) + ": bad br value " + t);
            }
        } else if (key == "failures") {
            for (const auto& t : split_list(value))
                spec.failure_counts.push_back(std::stoull(t));
        } else if (key == "trace") {
            spec.trace_path = value;
        } else if (key == "base_config") {
            spec.base = load_config_file(value);
        } else {
            throw ConfigError(name + ":" + std::to_string(lineno) + ": unknown sweep key " + key);
        }
    }
    if (pairs_auto) spec.mn_pairs.clear();
    if (spec.wc_bits.empty()) spec.wc_bits.push_back(spec.base.wc_bits);
    if (spec.policies.empty()) spec.policies.push_back(spec.base.policy);
    if (spec.br_enabled.empty()) spec.br_enabled.push_back(true);
    if (spec.failure_counts.empty()) spec.failure_counts.push_back(0);
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep spec: " + path);
    return parse_sweep_spec(in, path);
}

ExpandResult expand(const SweepSpec& spec) {
    ExpandResult res;
    if (spec.k_values.empty()) throw ConfigError("sweep needs at least one K value");
    for (uint32_t k : spec.k_values) {
        auto pairs = spec.mn_pairs.empty() ? SweepSpec::all_pairs(k) : spec.mn_pairs;
        for (auto [m, n] : pairs) {
            if (m + n != k) {
                ++res.filtered;
                continue;
            }
            for (Policy pol : spec.policies) {
                // LRW carries no write counter; its wc dimension collapses to 0.
                std::vector<uint32_t> wcs =
                    (pol == Policy::LRW) ? std::vector<uint32_t>{0} : spec.wc_bits;
                for (uint32_t wc : wcs) {
                    for (bool br : spec.br_enabled) {
                        for (uint64_t f : spec.failure_counts) {
                            SweepPoint p;
                            p.config = spec.base;
                            p.config.k_max_dirty = k;
                            p.config.dbt_entries = m;
                            p.config.wbq_entries = n;
                            p.config.wc_bits = wc;
                            p.config.policy = pol;
                            p.config.br_enabled = br;
                            p.config.dbt_enabled = true;
                            p.config.write_policy = WritePolicy::WriteBack;
                            double needed = p.config.e_reg_file_nj +
                                            double(k) * p.config.energies.llc_write_nj;
                            if (p.config.e_capacitor_nj < needed)
                                p.config.e_capacitor_nj = needed;
                            p.failures = f;
                            char buf[96];
                            std::snprintf(buf, sizeof buf, "K%u_M%u_N%u_WC%u_%s_br%d_f%llu", k, m,
                                          n, wc, pol == Policy::LFW ? "lfw" : "lrw", br ? 1 : 0,
                                          (unsigned long long)f);
                            p.label = buf;
                            res.points.push_back(std::move(p));
                        }
                    }
                }
            }
        }
    }
    if (res.points.empty()) throw ConfigError("sweep expansion produced no runs");
    return res;
}

namespace {

PowerSchedule schedule_for(uint64_t failures, uint64_t total_instr) {
    if (failures == 0) return PowerSchedule::none();
    return PowerSchedule::by_total_failures(failures, total_instr);
}

} // namespace

std::vector<RunResult> run_sweep(const SweepSpec& spec, std::span<const AccessRecord> trace,
                                 unsigned max_threads) {
    ExpandResult ex = expand(spec);
    uint64_t total_instr = trace.empty() ? 0 : trace.back().instr_index + 1;

    // One paired baseline-2 run per distinct failure count.
    std::map<uint64_t, SimStats> baseline_by_failures;
    for (const auto& p : ex.points) {
        if (baseline_by_failures.count(p.failures)) continue;
        HierarchyConfig bcfg = baseline_config(BaselineId::Baseline2, spec.base);
        Engine eng(bcfg, schedule_for(p.failures, total_instr));
        baseline_by_failures[p.failures] = eng.run(trace);
    }

    std::vector<RunResult> results(ex.points.size());
    std::atomic<size_t> next{0};
    unsigned threads = max_threads ? max_threads
                                   : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, 8);
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= ex.points.size()) return;
            const SweepPoint& p = ex.points[i];
            Engine eng(p.config, schedule_for(p.failures, total_instr));
            RunResult r;
            r.point = p;
            r.stats = eng.run(trace);
            r.baseline_stats = baseline_by_failures.at(p.failures);
            double eb = r.baseline_stats.total_energy_nj();
            r.gain_pct = eb > 0 ? (eb - r.stats.total_energy_nj()) / eb * 100.0 : 0.0;
            results[i] = std::move(r);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

std::vector<const RunResult*> rank(const std::vector<RunResult>& results, RankMetric metric) {
    auto value = [metric](const RunResult& r) -> double {
        switch (metric) {
        case RankMetric::TotalEnergy: return r.stats.total_energy_nj();
        case RankMetric::TotalCycles: return double(r.stats.total_cycles);
        case RankMetric::LlcWrites: return double(r.stats.llc_writes);
        case RankMetric::PcmWrites: return double(r.stats.pcm_writes);
        }
        return 0.0;
    };
    std::vector<const RunResult*> out;
    out.reserve(results.size());
    for (const auto& r : results) out.push_back(&r);
    std::stable_sort(out.begin(), out.end(), [&](const RunResult* a, const RunResult* b) {
        double va = value(*a), vb = value(*b);
        if (va != vb) return va < vb;
        size_t ha = std::hash<std::string>{}(a->point.config.canonical() + a->point.label);
        size_t hb = std::hash<std::string>{}(b->point.config.canonical() + b->point.label);
        return ha < hb;
    });
    return out;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string stats_csv_header() {
    return "label,role,k,m,n,wc_bits,policy,br_enabled,write_policy,dbt_enabled,failures,"
           "l1_reads,l1_writes,llc_reads,llc_writes,pcm_reads,pcm_writes,br_reads,br_writes,"
           "l1_hits,l1_misses,stall_cycles,total_cycles,energy_stable_nj,energy_backup_nj,"
           "energy_restore_nj,total_energy_nj,backups_performed,blocks_backed_up,"
           "restores_performed,gain_pct";
}

std::string stats_csv_row(const std::string& label, const HierarchyConfig& cfg,
                          uint64_t failures, const std::string& role, const SimStats& s,
                          double gain_pct) {
    std::ostringstream os;
    os << csv_field(label) << ',' << role << ',' << cfg.k_max_dirty << ',' << cfg.dbt_entries
       << ',' << cfg.wbq_entries << ',' << cfg.wc_bits << ','
       << (cfg.policy == Policy::LFW ? "lfw" : "lrw") << ',' << (cfg.br_enabled ? 1 : 0) << ','
       << (cfg.write_policy == WritePolicy::WriteBack ? "writeback" : "writethrough") << ','
       << (cfg.dbt_enabled ? 1 : 0) << ',' << failures << ',' << s.l1_reads << ','
       << s.l1_writes << ',' << s.llc_reads << ',' << s.llc_writes << ',' << s.pcm_reads << ','
       << s.pcm_writes << ',' << s.br_reads << ',' << s.br_writes << ',' << s.l1_hits << ','
       << s.l1_misses << ',' << s.stall_cycles << ',' << s.total_cycles << ','
       << fmt(s.energy_stable_nj) << ',' << fmt(s.energy_backup_nj) << ','
       << fmt(s.energy_restore_nj) << ',' << fmt(s.total_energy_nj()) << ','
       << s.backups_performed << ',' << s.blocks_backed_up << ',' << s.restores_performed << ','
       << fmt(gain_pct);
    return os.str();
}

void write_results_csv(std::ostream& out, const std::vector<RunResult>& results) {
    out << stats_csv_header() << '\n';
    for (const auto& r : results) {
        out << stats_csv_row(r.point.label, r.point.config, r.point.failures, "run", r.stats,
                             r.gain_pct)
            << '\n';
        HierarchyConfig bcfg = baseline_config(BaselineId::Baseline2, r.point.config);
        out << stats_csv_row(r.point.label + "_baseline2", bcfg, r.point.failures, "baseline-2",
                             r.baseline_stats, 0.0)
            << '\n';
    }
}

void write_ranking(std::ostream& out, const std::vector<RunResult>& results, RankMetric metric) {
    auto ranked = rank(results, metric);
    out << "rank,label,total_energy_nj,gain_pct_vs_baseline2\n";
    size_t i = 1;
    for (const RunResult* r : ranked) {
        out << i++ << ',' << csv_field(r->point.label) << ','
            << fmt(r->stats.total_energy_nj()) << ',' << fmt(r->gain_pct) << '\n';
    }
}

} // namespace imsim
