#include "fnet/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fnet/elements.hpp"
#include "fnet/errors.hpp"

namespace fnet {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw DataError(where + ": malformed number '" + token + "'");
    if (!std::isfinite(v)) throw DataError(where + ": non-finite number '" + token + "'");
    return v;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + tmp);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw DataError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("rename failed for " + path + ": " + ec.message());
}

namespace {

// Header fields are space-separated key=value pairs; values containing
// spaces are double-quoted.
std::vector<std::pair<std::string, std::string>> parse_header(const std::string& line,
                                                              const std::string& where) {
    std::vector<std::pair<std::string, std::string>> kv;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        const std::size_t eq = line.find('=', i);
        if (eq == std::string::npos) throw DataError(where + ": header token without '='");
        std::string key = line.substr(i, eq - i);
        std::string value;
        i = eq + 1;
        if (i < line.size() && line[i] == '"') {
            const std::size_t close = line.find('"', i + 1);
            if (close == std::string::npos) throw DataError(where + ": unterminated quote");
            value = line.substr(i + 1, close - i - 1);
            i = close + 1;
        } else {
            const std::size_t end = line.find(' ', i);
            value = line.substr(i, end == std::string::npos ? std::string::npos : end - i);
            i = end == std::string::npos ? line.size() : end;
        }
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

std::vector<AtomicStructure> parse_structures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open structure file: " + path);

    std::vector<AtomicStructure> out;
    std::string line;
    int lineno = 0;
    auto where = [&] { return path + ":" + std::to_string(lineno); };

    while (std::getline(in, line)) {
        ++lineno;
        if (split_ws(line).empty()) continue;  // blank between records

        int n = 0;
        {
            const auto toks = split_ws(line);
            if (toks.size() != 1)
                throw DataError(where() + ": expected atom count, got '" + line + "'");
            const auto res = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), n);
            if (res.ec != std::errc{} || n < 0)
                throw DataError(where() + ": malformed atom count '" + toks[0] + "'");
        }

        if (!std::getline(in, line)) throw DataError(where() + ": truncated record (no header)");
        ++lineno;
        AtomicStructure s;
        s.pbc = {false, false, false};
        bool saw_cell = false;
        for (auto& [key, value] : parse_header(line, where())) {
            if (key == "cell") {
                const auto nums = split_ws(value);
                if (nums.size() != 9) throw DataError(where() + ": cell needs 9 numbers");
                for (int k = 0; k < 9; ++k) s.cell.m[k] = parse_double(nums[k], where());
                saw_cell = true;
            } else if (key == "pbc") {
                const auto flags = split_ws(value);
                if (flags.size() != 3) throw DataError(where() + ": pbc needs 3 flags");
                for (int k = 0; k < 3; ++k) {
                    if (flags[k] != "T" && flags[k] != "F")
                        throw DataError(where() + ": pbc flag must be T or F");
                    s.pbc[k] = flags[k] == "T";
                }
            } else if (key == "energy") {
                s.energy = parse_double(value, where());
            } else {
                s.extra_header[key] = value;
            }
        }
        if (!saw_cell && (s.pbc[0] || s.pbc[1] || s.pbc[2]))
            throw DataError(where() + ": periodic structure without cell");

        bool any_forces = false;
        for (int a = 0; a < n; ++a) {
            if (!std::getline(in, line))
                throw DataError(path + ":" + std::to_string(lineno + 1) +
                                ": truncated record (expected " + std::to_string(n) +
                                " atom lines)");
            ++lineno;
            const auto toks = split_ws(line);
            if (toks.size() != 6 && toks.size() != 9)
                throw DataError(where() + ": expected 6 or 9 fields, got " +
                                std::to_string(toks.size()));
            const int z = element_from_symbol(toks[0]);
            if (z == 0) throw DataError(where() + ": unknown element symbol '" + toks[0] + "'");
            s.atomic_numbers.push_back(z);
            s.positions.push_back({parse_double(toks[1], where()), parse_double(toks[2], where()),
                                   parse_double(toks[3], where())});
            std::size_t k = 4;
            if (toks.size() == 9) {
                if (a == 0) {
                    s.forces.emplace();
                    any_forces = true;
                } else if (!any_forces) {
                    throw DataError(where() + ": inconsistent force columns within record");
                }
                s.forces->push_back({parse_double(toks[4], where()),
                                     parse_double(toks[5], where()),
                                     parse_double(toks[6], where())});
                k = 7;
            } else if (any_forces) {
                throw DataError(where() + ": inconsistent force columns within record");
            }
            if (toks[k] != "0" && toks[k] != "1")
                throw DataError(where() + ": fixed flag must be 0 or 1");
            s.fixed_mask.push_back(toks[k] == "1");
            int tag = 0;
            const auto res =
                std::from_chars(toks[k + 1].data(), toks[k + 1].data() + toks[k + 1].size(), tag);
            if (res.ec != std::errc{})
                throw DataError(where() + ": malformed tag '" + toks[k + 1] + "'");
            s.tags.push_back(tag);
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

std::string structure_to_string(const AtomicStructure& s) {
    std::ostringstream os;
    os << s.size() << '\n';
    os << "cell=\"";
    for (int k = 0; k < 9; ++k) os << (k ? " " : "") << format_double(s.cell.m[k]);
    os << "\" pbc=\"" << (s.pbc[0] ? 'T' : 'F') << ' ' << (s.pbc[1] ? 'T' : 'F') << ' '
       << (s.pbc[2] ? 'T' : 'F') << '"';
    if (s.energy) os << " energy=" << format_double(*s.energy);
    for (const auto& [key, value] : s.extra_header) {
        os << ' ' << key << '=';
        if (value.find(' ') != std::string::npos)
            os << '"' << value << '"';
        else
            os << value;
    }
    os << '\n';
    for (int a = 0; a < s.size(); ++a) {
        os << element_symbol(s.atomic_numbers[a]) << ' ' << format_double(s.positions[a].x)
           << ' ' << format_double(s.positions[a].y) << ' ' << format_double(s.positions[a].z);
        if (s.forces)
            os << ' ' << format_double((*s.forces)[a].x) << ' ' << format_double((*s.forces)[a].y)
               << ' ' << format_double((*s.forces)[a].z);
        os << ' ' << (s.fixed_mask[a] ? 1 : 0) << ' ' << (s.tags.empty() ? 0 : s.tags[a]) << '\n';
    }
    return os.str();
}

void write_structures(std::span<const AtomicStructure> structures, const std::string& path) {
    std::string blob;
    for (const AtomicStructure& s : structures) blob += structure_to_string(s);
    atomic_write_file(path, blob);
}

void write_trajectory(const RelaxationTrajectory& traj, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    csv << "step,max_force,energy\n";
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const RelaxStep& step = traj.steps[i];
        char name[64];
        std::snprintf(name, sizeof name, "step_%04zu.xyz", i);
        write_structures({&step.structure, 1}, dir + "/" + name);
        csv << i << ',' << format_double(step.max_force) << ','
            << (step.energy ? format_double(*step.energy) : "nan") << '\n';
    }
    atomic_write_file(dir + "/trajectory.csv", csv.str());
}

}  // namespace fnet
