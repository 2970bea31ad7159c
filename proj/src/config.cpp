#include "imsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace imsim {

namespace {

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        uint64_t r = std::stoull(v, &pos, 0);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for '" + key + "': " + v);
    }
}

double parse_f64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    std::string s = lower(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("invalid boolean for '" + key + "': " + v);
}

const char* policy_name(Policy p) { return p == Policy::LFW ? "lfw" : "lrw"; }
const char* write_policy_name(WritePolicy p) {
    return p == WritePolicy::WriteBack ? "writeback" : "writethrough";
}
const char* lrw_evict_name(LrwEvict e) {
    return e == LrwEvict::MostRecent ? "most_recent" : "least_recent";
}

} // namespace

uint32_t HierarchyConfig::lrw_rank_bits() const {
    uint32_t bits = 0;
    while ((1u << bits) < dbt_entries) ++bits;
    return bits;
}

uint32_t derive_k(double e_capacitor_nj, double e_reg_file_nj, double e_w_sttram_nj) {
    if (e_w_sttram_nj <= 0.0)
        throw ConfigError("sttram write energy must be positive");
    if (e_capacitor_nj < e_reg_file_nj)
        throw ConfigError("capacitor cannot cover the register-file backup cost");
    // Epsilon guards the exact-multiple case (e.g. 8.672 / 0.542 == 16).
    return uint32_t(std::floor((e_capacitor_nj - e_reg_file_nj) / e_w_sttram_nj + 1e-9));
}

double backup_energy_full_l1(const HierarchyConfig& cfg) {
    return double(cfg.l1_blocks()) * cfg.energies.llc_write_nj;
}

void HierarchyConfig::validate() const {
    if (!is_pow2(l1_size_bytes) || !is_pow2(llc_size_bytes) || !is_pow2(block_size_bytes) ||
        !is_pow2(mem_size_bytes))
        throw ConfigError("all sizes must be powers of two");
    if (block_size_bytes < 8)
        throw ConfigError("block size must be at least 8 bytes");
    if (l1_assoc == 0 || llc_assoc == 0)
        throw ConfigError("associativity must be positive");
    if (l1_size_bytes % (uint64_t(block_size_bytes) * l1_assoc) != 0 ||
        llc_size_bytes % (uint64_t(block_size_bytes) * llc_assoc) != 0)
        throw ConfigError("associativity must divide the set count evenly");
    if (!is_pow2(l1_sets()) || !is_pow2(llc_sets()))
        throw ConfigError("set counts must be powers of two");
    if (mem_size_bytes < llc_size_bytes)
        throw ConfigError("main memory smaller than the LLC");
    if (mem_ops_per_instr <= 0.0)
        throw ConfigError("mem_ops_per_instr must be positive");

    if (write_policy == WritePolicy::WriteThrough && dbt_enabled)
        throw ConfigError("write-through L1 cannot carry a DBT (no dirty blocks to track)");

    if (dbt_enabled) {
        if (k_max_dirty != dbt_entries + wbq_entries)
            throw ConfigError("K must equal M + N (k_max_dirty = dbt_entries + wbq_entries)");
        if (dbt_entries == 0)
            throw ConfigError("DBT needs at least one entry");
        if (policy == Policy::LFW && wc_bits < 1)
            throw ConfigError("LFW requires wc_bits >= 1");
        if (wc_bits > 31)
            throw ConfigError("wc_bits too large");
        if (k_max_dirty > l1_blocks())
            throw ConfigError("K exceeds the number of L1 blocks");
        uint32_t affordable = derive_k(e_capacitor_nj, e_reg_file_nj, energies.llc_write_nj);
        if (k_max_dirty > affordable)
            throw ConfigError("capacitor too small for K: derive_k = " +
                              std::to_string(affordable) + " < K = " +
                              std::to_string(k_max_dirty));
    }
}

namespace {

struct FieldDef {
    const char* key;
    std::function<void(HierarchyConfig&, const std::string&)> set;
    std::function<std::string(const HierarchyConfig&)> get;
};

std::string fmt_f64(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

const std::vector<FieldDef>& fields() {
    auto u64 = [](uint64_t HierarchyConfig::* m, const char* key) {
        return FieldDef{key,
                        [m, key](HierarchyConfig& c, const std::string& v) { c.*m = parse_u64(key, v); },
                        [m](const HierarchyConfig& c) { return std::to_string(c.*m); }};
    };
    auto u32 = [](uint32_t HierarchyConfig::* m, const char* key) {
        return FieldDef{key,
                        [m, key](HierarchyConfig& c, const std::string& v) {
                            c.*m = uint32_t(parse_u64(key, v));
                        },
                        [m](const HierarchyConfig& c) { return std::to_string(c.*m); }};
    };
    auto cyc = [](uint32_t Latencies::* m, const char* key) {
        return FieldDef{key,
                        [m, key](HierarchyConfig& c, const std::string& v) {
                            c.latencies.*m = uint32_t(parse_u64(key, v));
                        },
                        [m](const HierarchyConfig& c) { return std::to_string(c.latencies.*m); }};
    };
    auto nj = [](double Energies::* m, const char* key) {
        return FieldDef{key,
                        [m, key](HierarchyConfig& c, const std::string& v) {
                            c.energies.*m = parse_f64(key, v);
                        },
                        [m](const HierarchyConfig& c) { return fmt_f64(c.energies.*m); }};
    };
    auto f64 = [](double HierarchyConfig::* m, const char* key) {
        return FieldDef{key,
                        [m, key](HierarchyConfig& c, const std::string& v) { c.*m = parse_f64(key, v); },
                        [m](const HierarchyConfig& c) { return fmt_f64(c.*m); }};
    };
    auto flag = [](bool HierarchyConfig::* m, const char* key) {
        return FieldDef{key,
                        [m, key](HierarchyConfig& c, const std::string& v) { c.*m = parse_bool(key, v); },
                        [m](const HierarchyConfig& c) { return (c.*m) ? "true" : "false"; }};
    };

    static const std::vector<FieldDef> defs = {
        u64(&HierarchyConfig::l1_size_bytes, "l1_size_bytes"),
        u32(&HierarchyConfig::l1_assoc, "l1_assoc"),
        u64(&HierarchyConfig::llc_size_bytes, "llc_size_bytes"),
        u32(&HierarchyConfig::llc_assoc, "llc_assoc"),
        u32(&HierarchyConfig::block_size_bytes, "block_size_bytes"),
        u64(&HierarchyConfig::mem_size_bytes, "mem_size_bytes"),
        cyc(&Latencies::sram_read_cycles, "sram_read_cycles"),
        cyc(&Latencies::sram_write_cycles, "sram_write_cycles"),
        cyc(&Latencies::sttram_read_cycles, "sttram_read_cycles"),
        cyc(&Latencies::sttram_write_cycles, "sttram_write_cycles"),
        cyc(&Latencies::pcm_read_cycles, "pcm_read_cycles"),
        cyc(&Latencies::pcm_write_cycles, "pcm_write_cycles"),
        nj(&Energies::l1_read_nj, "l1_read_energy_nj"),
        nj(&Energies::l1_write_nj, "l1_write_energy_nj"),
        nj(&Energies::llc_read_nj, "llc_read_energy_nj"),
        nj(&Energies::llc_write_nj, "llc_write_energy_nj"),
        nj(&Energies::pcm_read_nj, "pcm_read_energy_nj"),
        nj(&Energies::pcm_write_nj, "pcm_write_energy_nj"),
        u32(&HierarchyConfig::k_max_dirty, "k_max_dirty"),
        u32(&HierarchyConfig::dbt_entries, "dbt_entries"),
        u32(&HierarchyConfig::wbq_entries, "wbq_entries"),
        u32(&HierarchyConfig::wc_bits, "wc_bits"),
        {"policy",
         [](HierarchyConfig& c, const std::string& v) {
             std::string s = lower(v);
             if (s == "lfw") c.policy = Policy::LFW;
             else if (s == "lrw") c.policy = Policy::LRW;
             else throw ConfigError("policy must be lfw or lrw, got: " + v);
         },
         [](const HierarchyConfig& c) { return std::string(policy_name(c.policy)); }},
        {"lrw_evict",
         [](HierarchyConfig& c, const std::string& v) {
             std::string s = lower(v);
             if (s == "most_recent") c.lrw_evict = LrwEvict::MostRecent;
             else if (s == "least_recent") c.lrw_evict = LrwEvict::LeastRecent;
             else throw ConfigError("lrw_evict must be most_recent or least_recent, got: " + v);
         },
         [](const HierarchyConfig& c) { return std::string(lrw_evict_name(c.lrw_evict)); }},
        {"write_policy",
         [](HierarchyConfig& c, const std::string& v) {
             std::string s = lower(v);
             if (s == "writeback" || s == "write_back") c.write_policy = WritePolicy::WriteBack;
             else if (s == "writethrough" || s == "write_through")
                 c.write_policy = WritePolicy::WriteThrough;
             else throw ConfigError("write_policy must be writeback or writethrough, got: " + v);
         },
         [](const HierarchyConfig& c) { return std::string(write_policy_name(c.write_policy)); }},
        flag(&HierarchyConfig::dbt_enabled, "dbt_enabled"),
        flag(&HierarchyConfig::br_enabled, "br_enabled"),
        flag(&HierarchyConfig::llc_volatile, "llc_volatile"),
        flag(&HierarchyConfig::capacitor_strict, "capacitor_strict"),
        f64(&HierarchyConfig::e_capacitor_nj, "e_capacitor_nj"),
        f64(&HierarchyConfig::e_reg_file_nj, "e_reg_file_nj"),
        f64(&HierarchyConfig::mem_ops_per_instr, "mem_ops_per_instr"),
        flag(&HierarchyConfig::allow_address_wrap, "allow_address_wrap"),
    };
    return defs;
}

} // namespace

void apply_override(HierarchyConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key: " + key);
}

void apply_env_overrides(HierarchyConfig& cfg) {
    for (const auto& f : fields()) {
        std::string env = "SIM_";
        for (const char* p = f.key; *p; ++p) env += char(std::toupper(uint8_t(*p)));
        if (const char* v = std::getenv(env.c_str())) f.set(cfg, v);
    }
}

std::string HierarchyConfig::canonical() const {
    std::ostringstream os;
    for (const auto& f : fields()) os << f.key << " = " << f.get(*this) << "\n";
    return os.str();
}

HierarchyConfig parse_config(std::istream& in, const std::string& name) {
    HierarchyConfig cfg;
    std::string line;
    size_t lineno = 0;
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
        try {
            apply_override(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

HierarchyConfig load_config_file(const std::string& path, bool apply_env) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    HierarchyConfig cfg = parse_config(in, path);
    if (apply_env) apply_env_overrides(cfg);
    return cfg;
}

} // namespace imsim
