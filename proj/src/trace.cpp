#include "imsim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "imsim/config.hpp"

namespace imsim {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'B', '1'};

void put_u16(std::ostream& out, uint16_t v) {
    char b[2] = {char(v & 0xff), char(v >> 8)};
    out.write(b, 2);
}

void put_u64(std::ostream& out, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

uint16_t get_u16(const uint8_t* p) { return uint16_t(p[0] | (p[1] << 8)); }

uint64_t get_u64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
    return v;
}

} // namespace

void parse_text_trace(std::istream& in, const RecordSink& sink, double mem_ops_per_instr,
                      const std::string& name) {
    std::string line;
    size_t lineno = 0;
    uint64_t ordinal = 0;
    double instr_acc = 0.0;
    double instr_step = 1.0 / mem_ops_per_instr;
    uint64_t last_instr = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (size_t h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::string kind_s, addr_s, instr_s;
        if (!(ls >> kind_s)) continue; // blank line
        AccessRecord rec{};
        if (kind_s == "R" || kind_s == "r")
            rec.kind = AccessKind::Read;
        else if (kind_s == "W" || kind_s == "w")
            rec.kind = AccessKind::Write;
        else
            throw TraceError(name + ":" + std::to_string(lineno) +
                             ": bad access kind '" + kind_s + "' (expected R or W)");
        if (!(ls >> addr_s))
            throw TraceError(name + ":" + std::to_string(lineno) + ": missing address");
        try {
            size_t pos = 0;
            rec.address = std::stoull(addr_s, &pos, 16);
            if (pos != addr_s.size()) throw std::invalid_argument(addr_s);
        } catch (const std::exception&) {
            throw TraceError(name + ":" + std::to_string(lineno) + ": bad address '" + addr_s +
                             "'");
        }
        if (ls >> instr_s) {
            try {
                size_t pos = 0;
                rec.instr_index = std::stoull(instr_s, &pos, 10);
                if (pos != instr_s.size()) throw std::invalid_argument(instr_s);
            } catch (const std::exception&) {
                throw TraceError(name + ":" + std::to_string(lineno) + ": bad instruction index '" +
                                 instr_s + "'");
            }
        } else {
            rec.instr_index = uint64_t(instr_acc);
        }
        if (rec.instr_index < last_instr)
            throw TraceError(name + ":" + std::to_string(lineno) +
                             ": instruction index decreases");
        last_instr = rec.instr_index;
        instr_acc += instr_step;
        ++ordinal;
        sink(rec);
    }
    (void)ordinal;
}

void write_text_trace(std::ostream& out, const std::vector<AccessRecord>& records) {
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%c 0x%08llx %llu\n",
                      r.kind == AccessKind::Read ? 'R' : 'W',
                      (unsigned long long)r.address, (unsigned long long)r.instr_index);
        out << buf;
    }
}

void parse_binary_trace(std::istream& in, const RecordSink& sink, const std::string& name) {
    uint8_t header[16];
    in.read(reinterpret_cast<char*>(header), 16);
    if (in.gcount() != 16 || std::memcmp(header, kMagic, 4) != 0)
        throw TraceError(name + ": bad binary trace header");
    TraceHeader h;
    h.version = get_u16(header + 4);
    h.address_bits = get_u16(header + 6);
    h.record_count = get_u64(header + 8);
    if (h.version != 1)
        throw TraceError(name + ": unsupported trace version " + std::to_string(h.version));
    uint64_t last_instr = 0;
    for (uint64_t i = 0; i < h.record_count; ++i) {
        uint8_t rec[17];
        in.read(reinterpret_cast<char*>(rec), 17);
        if (in.gcount() != 17)
            throw TraceError(name + ": truncated record " + std::to_string(i));
        if (rec[0] > 1)
            throw TraceError(name + ": bad access kind in record " + std::to_string(i));
        AccessRecord r{AccessKind(rec[0]), get_u64(rec + 1), get_u64(rec + 9)};
        if (r.instr_index < last_instr)
            throw TraceError(name + ": instruction index decreases at record " +
                             std::to_string(i));
        last_instr = r.instr_index;
        sink(r);
    }
}

void write_binary_trace(std::ostream& out, const std::vector<AccessRecord>& records,
                        uint16_t address_bits) {
    out.write(kMagic, 4);
    put_u16(out, 1);
    put_u16(out, address_bits);
    put_u64(out, records.size());
    for (const auto& r : records) {
        char kind = char(r.kind);
        out.write(&kind, 1);
        put_u64(out, r.address);
        put_u64(out, r.instr_index);
    }
}

namespace {
bool ends_with(const std::string& s, const char* suffix) {
    size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}
} // namespace

std::vector<AccessRecord> load_trace(const std::string& path, double mem_ops_per_instr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError("cannot open trace file: " + path);
    std::vector<AccessRecord> out;
    auto sink = [&out](const AccessRecord& r) { out.push_back(r); };
    if (ends_with(path, ".mtb"))
        parse_binary_trace(in, sink, path);
    else
        parse_text_trace(in, sink, mem_ops_per_instr, path);
    return out;
}

void save_trace(const std::string& path, const std::vector<AccessRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TraceError("cannot open trace file for writing: " + path);
    if (ends_with(path, ".mtb"))
        write_binary_trace(out, records);
    else
        write_text_trace(out, records);
}

namespace {

// Rank-based Zipf over block indices via an inverse-CDF table.
struct ZipfTable {
    std::vector<double> cdf;
    ZipfTable(uint64_t n, double s) {
        cdf.resize(n);
        double sum = 0.0;
        for (uint64_t i = 0; i < n; ++i) {
            sum += 1.0 / std::pow(double(i + 1), s);
            cdf[i] = sum;
        }
        for (auto& v : cdf) v /= sum;
    }
    uint64_t sample(double u) const {
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        return uint64_t(it - cdf.begin());
    }
};

} // namespace

std::vector<AccessRecord> generate(const SyntheticSpec& spec) {
    IMSIM_CHECK(spec.working_set_bytes >= spec.block_size_bytes, "working set below one block");
    IMSIM_CHECK(spec.write_fraction >= 0.0 && spec.write_fraction <= 1.0,
                "write_fraction outside [0, 1]");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    uint64_t blocks = spec.working_set_bytes / spec.block_size_bytes;
    uint64_t words_per_block = spec.block_size_bytes / 8;

    ZipfTable* zipf = nullptr;
    ZipfTable zipf_table(spec.locality == LocalityKind::Zipf ? blocks : 1, spec.zipf_s);
    if (spec.locality == LocalityKind::Zipf) zipf = &zipf_table;

    // Hot ranks are scattered over the working set so Zipf locality does not
    // collapse onto a handful of cache sets.
    uint64_t scatter = mix64(spec.seed) | 1;

    uint64_t stride_pos = 0;
    size_t loop_region = 0;
    uint64_t loop_pos = 0;

    std::vector<AccessRecord> out;
    out.reserve(spec.record_count);
    double instr_acc = 0.0;
    double instr_step = 1.0 / spec.mem_ops_per_instr;
    for (uint64_t i = 0; i < spec.record_count; ++i) {
        uint64_t block;
        switch (spec.locality) {
        case LocalityKind::Uniform:
            block = rng() % blocks;
            break;
        case LocalityKind::Zipf:
            block = (zipf->sample(uni(rng)) * scatter) % blocks;
            break;
        case LocalityKind::Strided:
            block = (stride_pos / spec.block_size_bytes) % blocks;
            stride_pos += spec.stride_bytes;
            if (stride_pos >= spec.working_set_bytes) stride_pos = 0;
            break;
        case LocalityKind::LoopNest: {
            IMSIM_CHECK(!spec.loop_sizes.empty(), "LoopNest needs at least one region size");
            uint64_t region_bytes = spec.loop_sizes[loop_region % spec.loop_sizes.size()];
            uint64_t region_blocks = std::max<uint64_t>(1, region_bytes / spec.block_size_bytes);
            block = loop_pos % std::min(region_blocks, blocks);
            ++loop_pos;
            if (loop_pos >= region_blocks) {
                loop_pos = 0;
                ++loop_region;
            }
            break;
        }
        default:
            throw SimBugError("unknown locality kind");
        }
        uint64_t word = rng() % words_per_block;
        AccessRecord rec;
        rec.address = block * spec.block_size_bytes + word * 8;
        rec.kind = (uni(rng) < spec.write_fraction) ? AccessKind::Write : AccessKind::Read;
        rec.instr_index = uint64_t(instr_acc);
        instr_acc += instr_step;
        out.push_back(rec);
    }
    return out;
}

LocalityKind parse_locality(const std::string& text, SyntheticSpec& spec) {
    std::string head = text;
    std::string arg;
    if (size_t c = text.find(':'); c != std::string::npos) {
        head = text.substr(0, c);
        arg = text.substr(c + 1);
    }
    if (head == "uniform") {
        spec.locality = LocalityKind::Uniform;
    } else if (head == "zipf") {
        spec.locality = LocalityKind::Zipf;
        if (!arg.empty()) spec.zipf_s = std::stod(arg);
    } else if (head == "strided") {
        spec.locality = LocalityKind::Strided;
        if (!arg.empty()) spec.stride_bytes = std::stoull(arg);
    } else if (head == "loop") {
        spec.locality = LocalityKind::LoopNest;
        spec.loop_sizes.clear();
        std::istringstream as(arg);
        std::string tok;
        while (std::getline(as, tok, ',')) spec.loop_sizes.push_back(std::stoull(tok));
    } else {
        throw ConfigError("unknown locality: " + text);
    }
    return spec.locality;
}

} // namespace imsim
