#include "hamlearn/table.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hamlearn {

TableFormat table_format_from_string(std::string_view name) {
    if (name == "pretty") return TableFormat::pretty;
    if (name == "csv") return TableFormat::csv;
    throw std::invalid_argument("unknown table format '" + std::string(name) + "' (expected csv or pretty)");
}

namespace {

constexpr const char *kMissing = "—";

// Terminal columns taken by a UTF-8 string (every code point counts as one).
std::size_t display_width(const std::string &s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(const std::string &s, std::size_t width) { return s + std::string(width - std::min(width, display_width(s)), ' '); }

struct Column {
    const char *method;
    const char *phase;
    const char *title;
};

constexpr std::array<Column, 4> kColumns{{{"two_step", "interpolation", "2-step interp."},
                                          {"two_step", "extrapolation", "2-step extrap."},
                                          {"one_step", "interpolation", "1-step interp."},
                                          {"one_step", "extrapolation", "1-step extrap."}}};

std::string cell_text(const ErrorRow &r) {
    std::string s = fmt::format("{:.6g} ± {:.6g}", r.mean, r.std);
    if (r.n_diverged > 0) s += fmt::format(" ({}/{} div.)", r.n_diverged, r.n_seeds);
    return s;
}

std::string render_pretty(const std::vector<ErrorRow> &rows) {
    // Groups in order of first appearance.
    std::vector<std::pair<std::string, std::string>> groups;
    for (const ErrorRow &r : rows) {
        const std::pair<std::string, std::string> key{r.system, r.kernel};
        if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
    }

    std::string out;
    for (const auto &[system, kernel] : groups) {
        for (const char *variable : {"q", "p"}) {
            std::map<double, std::array<std::string, 4>> table;
            for (const ErrorRow &r : rows) {
                if (r.system != system || r.kernel != kernel) continue;
                auto &line = table.try_emplace(r.sparsity, std::array<std::string, 4>{kMissing, kMissing, kMissing, kMissing}).first->second;
                if (r.variable != variable) continue;
                for (std::size_t c = 0; c < kColumns.size(); ++c) {
                    if (r.method == kColumns[c].method && r.phase == kColumns[c].phase) line[c] = cell_text(r);
                }
            }

            std::array<std::size_t, 5> width{display_width("sparsity"), 0, 0, 0, 0};
            for (std::size_t c = 0; c < kColumns.size(); ++c) width[c + 1] = display_width(kColumns[c].title);
            for (const auto &[a, line] : table) {
                width[0] = std::max(width[0], display_width(fmt::format("{:g}", a)));
                for (std::size_t c = 0; c < line.size(); ++c) width[c + 1] = std::max(width[c + 1], display_width(line[c]));
            }

            out += fmt::format("{} / {}: relative errors in {} (mean ± std)\n", system, kernel, variable);
            std::string header = pad("sparsity", width[0]);
            for (std::size_t c = 0; c < kColumns.size(); ++c) header += " | " + pad(kColumns[c].title, width[c + 1]);
            header.erase(header.find_last_not_of(' ') + 1);
            out += header + "\n";
            std::string rule(width[0], '-');
            for (std::size_t c = 0; c < kColumns.size(); ++c) rule += "-+-" + std::string(width[c + 1], '-');
            out += rule + "\n";
            for (const auto &[a, line] : table) {
                std::string text = pad(fmt::format("{:g}", a), width[0]);
                for (std::size_t c = 0; c < line.size(); ++c) text += " | " + pad(line[c], width[c + 1]);
                // Trailing blanks from the last pad are noise.
                text.erase(text.find_last_not_of(' ') + 1);
                out += text + "\n";
            }
            out += "\n";
        }
    }
    return out;
}

}  // namespace

std::string render_table(const std::vector<ErrorRow> &rows, TableFormat format) {
    return format == TableFormat::csv ? format_errors_csv(rows) : render_pretty(rows);
}

std::string render_results(const std::filesystem::path &results_dir, TableFormat format) {
    const std::filesystem::path path = results_dir / "errors.csv";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return render_table(parse_errors_csv(buf.str()), format);
}

}  // namespace hamlearn
