#include "adkit/audit.hpp"

#include "adkit/errors.hpp"

#include <fstream>

namespace adkit::audit {

void append_abnormal_accesses(const std::filesystem::path& path,
                              const std::vector<AuditEntry>& entries) {
    if (entries.empty()) return;
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("audit: cannot open " + path.string());
    if (fresh) out << kAuditHeader << "\n";
    for (const auto& entry : entries)
        out << entry.stage << "," << entry.cohort << "," << entry.seed << ","
            << entry.sample_path << "\n";
    if (!out) throw IoError("audit: write failed for " + path.string());
}

std::vector<AuditEntry> read_audit_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("audit: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty audit log");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kAuditHeader)
        throw ParseError(path.string() + ": bad header '" + line + "'");

    std::vector<AuditEntry> entries;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        AuditEntry entry;
        std::size_t start = 0;
        std::vector<std::string> fields;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
                if (fields.size() == 3) break; // rest is the path, commas allowed
            }
        }
        if (fields.size() != 3 || start > line.size())
            throw ParseError(path.string() + " line " + std::to_string(line_no) +
                             ": expected stage,cohort,seed,sample_path");
        entry.stage = fields[0];
        entry.cohort = fields[1];
        try {
            entry.seed = std::stoull(fields[2]);
        } catch (const std::exception&) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) +
                             ": bad seed '" + fields[2] + "'");
        }
        entry.sample_path = line.substr(start);
        entries.push_back(std::move(entry));
    }
    return entries;
}

} // namespace adkit::audit
