#include "adkit/score_table.hpp"

#include "adkit/errors.hpp"

#include <cstdio>
#include <fstream>

namespace adkit::tab {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("score table: cannot open for writing " + path.string());
    return out;
}

struct LineReader {
    std::ifstream in;
    std::filesystem::path path;
    std::size_t line_no = 0;

    explicit LineReader(const std::filesystem::path& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw IoError("score table: cannot open " + p.string());
    }
    bool next(std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + what);
    }
};

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_score(LineReader& reader, const std::string& token) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        reader.fail("bad score '" + token + "'");
    }
}

void expect_header(LineReader& reader, const char* header) {
    std::string line;
    if (!reader.next(line)) reader.fail(std::string("missing header '") + header + "'");
    if (line != header)
        reader.fail("bad header '" + line + "', expected '" + header + "'");
}

void write_three_column(const std::filesystem::path& path, const char* header,
                        const std::vector<ScoreRow>& rows) {
    auto out = open_out(path);
    out << header << "\n";
    for (const auto& row : rows)
        out << row.sample_path << "," << to_string(row.label) << ","
            << fmt17(row.value) << "\n";
    if (!out) throw IoError("score table: write failed for " + path.string());
}

std::vector<ScoreRow> read_three_column(const std::filesystem::path& path,
                                        const char* header) {
    LineReader reader(path);
    expect_header(reader, header);
    std::vector<ScoreRow> rows;
    std::string line;
    while (reader.next(line)) {
        const auto fields = split_fields(line);
        if (fields.size() != 3)
            reader.fail("expected 3 fields, got " + std::to_string(fields.size()));
        ScoreRow row;
        row.sample_path = fields[0];
        try {
            row.label = parse_label(fields[1]);
        } catch (const ParseError& e) {
            reader.fail(e.what());
        }
        row.value = parse_score(reader, fields[2]);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

void write_raw_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows) {
    write_three_column(path, "sample_path,label,raw", rows);
}

std::vector<ScoreRow> read_raw_scores(const std::filesystem::path& path) {
    return read_three_column(path, "sample_path,label,raw");
}

void write_member_scores(const std::filesystem::path& path, const std::vector<MemberRow>& rows) {
    auto out = open_out(path);
    out << "sample_path,label,raw,normalized\n";
    for (const auto& row : rows)
        out << row.sample_path << "," << to_string(row.label) << ","
            << fmt17(row.raw) << "," << fmt17(row.normalized) << "\n";
    if (!out) throw IoError("score table: write failed for " + path.string());
}

std::vector<MemberRow> read_member_scores(const std::filesystem::path& path) {
    LineReader reader(path);
    expect_header(reader, "sample_path,label,raw,normalized");
    std::vector<MemberRow> rows;
    std::string line;
    while (reader.next(line)) {
        const auto fields = split_fields(line);
        if (fields.size() != 4)
            reader.fail("expected 4 fields, got " + std::to_string(fields.size()));
        MemberRow row;
        row.sample_path = fields[0];
        try {
            row.label = parse_label(fields[1]);
        } catch (const ParseError& e) {
            reader.fail(e.what());
        }
        row.raw = parse_score(reader, fields[2]);
        row.normalized = parse_score(reader, fields[3]);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_combined_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows) {
    write_three_column(path, "sample_path,label,score", rows);
}

std::vector<ScoreRow> read_combined_scores(const std::filesystem::path& path) {
    return read_three_column(path, "sample_path,label,score");
}

} // namespace adkit::tab
