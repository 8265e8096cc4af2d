#include "spiderp/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "spiderp/errors.hpp"

namespace spiderp {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Splits `line` at commas into at most `max_fields` string_views.
size_t split_fields(std::string_view line, std::string_view* out, size_t max_fields) {
    size_t n = 0;
    size_t pos = 0;
    while (n < max_fields) {
        size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out[n++] = line.substr(pos);
            break;
        }
        out[n++] = line.substr(pos, comma - pos);
        pos = comma + 1;
    }
    return n;
}

double parse_double(std::string_view s, const std::filesystem::path& path, size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError("bad number '" + std::string(s) + "' at " + path.filename().string() +
                      ":" + std::to_string(line_no));
    return v;
}

long parse_long(std::string_view s, const std::filesystem::path& path, size_t line_no) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError("bad integer '" + std::string(s) + "' at " + path.filename().string() +
                      ":" + std::to_string(line_no));
    return v;
}

// Iterates lines (without trailing \n or \r\n); calls fn(line, line_no).
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
    size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        size_t end = (nl == std::string::npos) ? text.size() : nl;
        size_t trimmed = end;
        if (trimmed > pos && text[trimmed - 1] == '\r') --trimmed;
        fn(std::string_view(text).substr(pos, trimmed - pos), ++line_no);
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace

std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_shortest(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<double> read_signal_csv(const std::filesystem::path& path, double fs) {
    if (fs <= 0.0) throw BadSamplingRate("fs must be positive, got " + format_shortest(fs));
    const std::string text = read_file(path);
    std::vector<double> samples;
    samples.reserve(text.size() / 12);
    for_each_line(text, [&](std::string_view line, size_t line_no) {
        if (line_no == 1) {
            if (line != "t,value")
                throw IoError("expected header 't,value' in " + path.string());
            return;
        }
        if (line.empty()) return;
        std::string_view f[2];
        if (split_fields(line, f, 2) != 2)
            throw IoError("expected 't,value' row at " + path.filename().string() + ":" +
                          std::to_string(line_no));
        const double t = parse_double(f[0], path, line_no);
        const double expected_t = static_cast<double>(samples.size()) / fs;
        if (std::abs(t - expected_t) > 1e-6)
            throw BadSamplingRate("t column of " + path.filename().string() +
                                  " disagrees with declared fs=" + format_shortest(fs) +
                                  " at row " + std::to_string(line_no));
        samples.push_back(parse_double(f[1], path, line_no));
    });
    return samples;
}

void write_signal_csv(const std::filesystem::path& path, const std::vector<double>& samples,
                      double fs) {
    auto out = open_out(path);
    std::string buf = "t,value\n";
    buf.reserve(samples.size() * 24 + 16);
    char num[32];
    for (size_t i = 0; i < samples.size(); ++i) {
        int n = std::snprintf(num, sizeof(num), "%.9f", static_cast<double>(i) / fs);
        buf.append(num, n);
        buf.push_back(',');
        auto [ptr, ec] = std::to_chars(num, num + sizeof(num), samples[i]);
        buf.append(num, ptr - num);
        buf.push_back('\n');
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<Annotation> read_annotation_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<Annotation> annotations;
    for_each_line(text, [&](std::string_view line, size_t line_no) {
        if (line_no == 1) {
            if (line != "start_s,end_s,fr_label")
                throw IoError("expected header 'start_s,end_s,fr_label' in " + path.string());
            return;
        }
        if (line.empty()) return;
        std::string_view f[3];
        if (split_fields(line, f, 3) != 3)
            throw IoError("expected 3 fields at " + path.filename().string() + ":" +
                          std::to_string(line_no));
        Annotation a;
        a.start_s = parse_double(f[0], path, line_no);
        a.end_s = parse_double(f[1], path, line_no);
        a.fr_label = static_cast<int>(parse_long(f[2], path, line_no));
        if (a.fr_label != 0 && a.fr_label != 1)
            throw IoError("fr_label must be 0 or 1 at " + path.filename().string() + ":" +
                          std::to_string(line_no));
        annotations.push_back(a);
    });
    return annotations;
}

void write_annotation_csv(const std::filesystem::path& path,
                          const std::vector<Annotation>& annotations) {
    auto out = open_out(path);
    out << "start_s,end_s,fr_label\n";
    for (const auto& a : annotations)
        out << format_shortest(a.start_s) << ',' << format_shortest(a.end_s) << ',' << a.fr_label
            << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<ManifestEntry> entries;
    for_each_line(text, [&](std::string_view line, size_t line_no) {
        if (line_no == 1) {
            if (line != "id,role,sex,pclm,fs,ecg_path,gsr_path,annotation_path")
                throw IoError("bad manifest header in " + path.string());
            return;
        }
        if (line.empty()) return;
        std::string_view f[8];
        if (split_fields(line, f, 8) != 8)
            throw IoError("expected 8 fields at " + path.filename().string() + ":" +
                          std::to_string(line_no));
        ManifestEntry e;
        e.id = std::string(f[0]);
        if (f[1] == "source")
            e.role = Role::source;
        else if (f[1] == "target")
            e.role = Role::target;
        else
            throw IoError("role must be source|target at " + path.filename().string() + ":" +
                          std::to_string(line_no));
        e.sex = static_cast<int>(parse_long(f[2], path, line_no));
        if (e.sex != 0 && e.sex != 1)
            throw IoError("sex must be 0 or 1 at " + path.filename().string() + ":" +
                          std::to_string(line_no));
        if (!f[3].empty()) {
            const long pclm = parse_long(f[3], path, line_no);
            if (pclm < 17 || pclm > 85)
                throw IoError("pclm must be in [17,85] at " + path.filename().string() + ":" +
                              std::to_string(line_no));
            e.pclm = static_cast<int>(pclm);
        }
        e.fs = parse_double(f[4], path, line_no);
        e.ecg_path = std::string(f[5]);
        e.gsr_path = std::string(f[6]);
        if (!f[7].empty()) e.annotation_path = std::string(f[7]);
        entries.push_back(std::move(e));
    });
    return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    auto out = open_out(path);
    out << "id,role,sex,pclm,fs,ecg_path,gsr_path,annotation_path\n";
    for (const auto& e : entries) {
        out << e.id << ',' << (e.role == Role::source ? "source" : "target") << ',' << e.sex << ',';
        if (e.pclm) out << *e.pclm;
        out << ',' << format_shortest(e.fs) << ',' << e.ecg_path << ',' << e.gsr_path << ',';
        if (e.annotation_path) out << *e.annotation_path;
        out << '\n';
    }
}

RawRecord load_record(const ManifestEntry& entry, const std::filesystem::path& manifest_dir) {
    if (entry.fs <= 0.0)
        throw BadSamplingRate("subject " + entry.id + ": fs=" + format_shortest(entry.fs));
    RawRecord rec;
    rec.subject_id = entry.id;
    rec.fs = entry.fs;
    rec.ecg = read_signal_csv(manifest_dir / entry.ecg_path, entry.fs);
    rec.gsr = read_signal_csv(manifest_dir / entry.gsr_path, entry.fs);
    if (rec.ecg.size() != rec.gsr.size())
        throw LengthMismatch("subject " + entry.id + ": ecg has " +
                             std::to_string(rec.ecg.size()) + " samples, gsr has " +
                             std::to_string(rec.gsr.size()));
    if (static_cast<double>(rec.ecg.size()) < 20.0 * entry.fs)
        throw RecordTooShort("subject " + entry.id + ": record shorter than 20 s");
    if (entry.annotation_path) {
        rec.annotations = read_annotation_csv(manifest_dir / *entry.annotation_path);
        std::sort(rec.annotations.begin(), rec.annotations.end(),
                  [](const Annotation& a, const Annotation& b) { return a.start_s < b.start_s; });
        const double dur = rec.duration_s();
        double prev_end = -1.0;
        for (const auto& a : rec.annotations) {
            if (a.start_s < 0.0 || a.end_s > dur + 1e-9 || a.start_s >= a.end_s)
                throw IoError("subject " + entry.id + ": annotation outside [0," +
                              format_shortest(dur) + "]");
            if (a.start_s < prev_end - 1e-9)
                throw IoError("subject " + entry.id + ": overlapping annotations");
            prev_end = a.end_s;
        }
    }
    return rec;
}

}  // namespace spiderp
