#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbnot/graph.hpp"

namespace dbnot {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    }
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace detail

/// Read a dataset: one sample per line, comma-separated features, optionally a
/// final integer label column announced by a header line ending in "label".
inline LabeledDataset read_csv_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);

    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    bool has_label = false;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (first) {
            first = false;
            double tmp;
            const bool numeric = detail::parse_double(fields.front(), tmp);
            if (!numeric) {  // header line
                has_label = !fields.empty() && fields.back() == "label";
                continue;
            }
        }
        std::vector<double> vals;
        vals.reserve(fields.size());
        for (const auto& fstr : fields) {
            double v;
            if (!detail::parse_double(fstr, v))
                throw std::runtime_error("bad numeric field '" + fstr + "' in " + path);
            vals.push_back(v);
        }
        if (has_label) {
            labels.push_back(static_cast<int>(vals.back()));
            vals.pop_back();
        }
        if (!rows.empty() && vals.size() != rows.front().size())
            throw std::runtime_error("inconsistent column count in " + path);
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::runtime_error("no samples in " + path);

    LabeledDataset ds;
    const std::size_t n = rows.size(), d = rows.front().size();
    ds.features = FeatureMatrix(d, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) ds.features.at(k, i) = rows[i][k];
    if (has_label) ds.labels = std::move(labels);
    return ds;
}

/// Write-then-rename so readers never observe a partial file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ostringstream os;
    os << "index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) os << i << ',' << labels[i] << '\n';
    write_text_atomic(path, os.str());
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const std::vector<double>& objective,
                            const std::vector<double>& gap) {
    std::ostringstream os;
    os << "iter,objective,gap\n";
    for (std::size_t t = 0; t < objective.size(); ++t)
        os << (t + 1) << ',' << format_double(objective[t]) << ',' << format_double(gap[t])
           << '\n';
    write_text_atomic(path, os.str());
}

inline void write_colsum_csv(const std::filesystem::path& path,
                             const std::vector<double>& col_sums, double lower, double upper) {
    std::ostringstream os;
    os << "column,sum,lower,upper\n";
    for (std::size_t j = 0; j < col_sums.size(); ++j)
        os << j << ',' << format_double(col_sums[j]) << ',' << format_double(lower) << ','
           << format_double(upper) << '\n';
    write_text_atomic(path, os.str());
}

inline void write_plan_csv(const std::filesystem::path& path, const DenseMatrix& f) {
    std::ostringstream os;
    for (std::size_t i = 0; i < f.rows(); ++i) {
        for (std::size_t j = 0; j < f.cols(); ++j) {
            if (j) os << ',';
            os << format_double(f(i, j));
        }
        os << '\n';
    }
    write_text_atomic(path, os.str());
}

}  // namespace dbnot
