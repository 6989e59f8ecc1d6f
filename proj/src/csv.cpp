#include "wirebench/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wirebench/errors.hpp"

namespace wirebench {

namespace {

constexpr const char* kVersionComment = "# wirebench-csv v1";

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

template <typename T>
std::string opt_int(const std::optional<T>& v) {
    return v ? std::to_string(*v) : std::string();
}

std::string opt_real(const std::optional<double>& v) {
    return v ? format_real(*v) : std::string();
}

// Splits one CSV line honoring quoted fields.
std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::uint64_t parse_u64_field(const std::string& s, const char* name) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw IoError("csv: bad " + std::string(name) + " value '" + s + "'");
    return v;
}

std::optional<double> parse_opt_real(const std::string& s) {
    if (s.empty())
        return std::nullopt;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw IoError("csv: bad real value '" + s + "'");
    }
}

std::optional<std::uint64_t> parse_opt_u64(const std::string& s, const char* name) {
    if (s.empty())
        return std::nullopt;
    return parse_u64_field(s, name);
}

}  // namespace

const std::string& csv_header() {
    static const std::string header =
        "transport,mode,payload_bytes,run,messages,elapsed_ns,mmps,mbps,"
        "lat_avg_us,lat_p999_us,lat_p9999_us,wire_bytes,overhead_pct,error";
    return header;
}

std::string to_csv(std::vector<CsvRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
        if (a.payload_bytes != b.payload_bytes)
            return a.payload_bytes < b.payload_bytes;
        return a.run < b.run;
    });

    std::string out = std::string(kVersionComment) + "\n" + csv_header() + "\n";
    for (const CsvRow& r : rows) {
        out += quote_if_needed(r.transport);
        out += ',';
        out += quote_if_needed(r.mode);
        out += ',';
        out += std::to_string(r.payload_bytes);
        out += ',';
        out += std::to_string(r.run);
        out += ',';
        out += std::to_string(r.messages);
        out += ',';
        out += std::to_string(r.elapsed_ns);
        out += ',';
        out += opt_real(r.mmps);
        out += ',';
        out += opt_real(r.mbps);
        out += ',';
        out += opt_real(r.lat_avg_us);
        out += ',';
        out += opt_real(r.lat_p999_us);
        out += ',';
        out += opt_real(r.lat_p9999_us);
        out += ',';
        out += opt_int(r.wire_bytes);
        out += ',';
        out += opt_real(r.overhead_pct);
        out += ',';
        out += quote_if_needed(r.error);
        out += '\n';
    }
    return out;
}

void write_csv(const std::vector<CsvRow>& rows, const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw IoError("cannot open '" + path.string() + "' for writing");
    file << to_csv(rows);
    file.flush();
    if (!file)
        throw IoError("write failed for '" + path.string() + "'");
}

std::vector<CsvRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    std::vector<CsvRow> rows;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        if (!header_seen) {
            if (line != csv_header())
                throw IoError("csv: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        const std::vector<std::string> f = split_line(line);
        if (f.size() != 14)
            throw IoError("csv: expected 14 fields, got " + std::to_string(f.size()));
        CsvRow r;
        r.transport = f[0];
        r.mode = f[1];
        r.payload_bytes = parse_u64_field(f[2], "payload_bytes");
        r.run = static_cast<std::uint32_t>(parse_u64_field(f[3], "run"));
        r.messages = parse_u64_field(f[4], "messages");
        r.elapsed_ns = parse_u64_field(f[5], "elapsed_ns");
        r.mmps = parse_opt_real(f[6]);
        r.mbps = parse_opt_real(f[7]);
        r.lat_avg_us = parse_opt_real(f[8]);
        r.lat_p999_us = parse_opt_real(f[9]);
        r.lat_p9999_us = parse_opt_real(f[10]);
        r.wire_bytes = parse_opt_u64(f[11], "wire_bytes");
        r.overhead_pct = parse_opt_real(f[12]);
        r.error = f[13];
        rows.push_back(std::move(r));
    }
    if (!header_seen)
        throw IoError("csv: missing header");
    return rows;
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << file.rdbuf();
    return parse_csv(buf.str());
}

}  // namespace wirebench
