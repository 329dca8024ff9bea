#include "qdeloc/series.hpp"
#include "qdeloc/errors.hpp"
#include "qdeloc/oracles.hpp"

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace qdeloc::harness {

std::string_view provenance_name(Provenance p) {
    switch (p) {
    case Provenance::mc: return "mc";
    case Provenance::tn: return "tn";
    case Provenance::oracle: return "oracle";
    }
    return "?";
}

std::string_view kind_name(ValueKind k) {
    switch (k) {
    case ValueKind::ipr: return "ipr";
    case ValueKind::purity: return "purity";
    case ValueKind::bipartition_sum: return "ipr_bipartition_sum";
    }
    return "?";
}

void ObservableSeries::append(const ObservableSeries &other) {
    records.insert(records.end(), other.records.begin(), other.records.end());
}

std::vector<ObservableRecord> ObservableSeries::select(Provenance p, ValueKind kind, int d, int N, double q,
                                                       int cut) const {
    std::vector<ObservableRecord> out;
    for (const auto &r : records)
        if (r.provenance == p && r.kind == kind && r.d == d && r.N == N && r.q == q && r.cut == cut) out.push_back(r);
    std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.t < b.t; });
    return out;
}

std::vector<int> ObservableSeries::sizes() const {
    std::set<int> s;
    for (const auto &r : records) s.insert(r.N);
    return {s.begin(), s.end()};
}

std::vector<ObservableRecord> ObservableSeries::deficit_violations(double slack) const {
    std::vector<ObservableRecord> bad;
    for (const auto &r : records)
        if (r.provenance != Provenance::mc && std::isfinite(r.deficit) && r.deficit < -slack) bad.push_back(r);
    return bad;
}

double haar_reference_entropy(int d, int N, double q) {
    if (q != std::floor(q) || q < 1) return kNaN;
    return oracles::haar_entropy(d, N, static_cast<int>(q));
}

double ipr_deficit(int d, int N, double q, double log_ipr) {
    if (q != std::floor(q) || q < 1) return kNaN;
    if (q == 1.0) return haar_reference_entropy(d, N, 1.0) - log_ipr;
    return (log_ipr - oracles::haar_log_ipr(d, N, static_cast<int>(q))) / (q - 1.0);
}

double tn_deficit_error(int N, int t, double q, double eps) {
    const double scale = q > 1.0 ? q - 1.0 : 1.0;
    return std::sqrt(static_cast<double>(N) * std::max(t, 1) * eps) / scale;
}

CsvWriter::CsvWriter(const std::string &path, std::vector<std::string> header) : path_(path) {
    namespace fs = std::filesystem;
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    out_.open(path, std::ios::app);
    if (!out_) throw ConfigError(fmt::format("cannot open {} for writing", path));
    if (fresh) row(header);
}

void CsvWriter::row(const std::vector<std::string> &cells) {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
    out_.flush();
}

namespace {

double number(const std::string &s) { return s.empty() ? kNaN : std::stod(s); }

} // namespace

ObservableSeries read_series_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open {}", path));
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(fmt::format("{} is empty", path));
    std::vector<std::string> header;
    boost::algorithm::split(header, line, boost::is_any_of(","));
    const bool exact = header.size() == 12 && header[2] == "I_mean";
    const bool tn = header.size() == 9 && header[1] == "value_kind";
    if (!exact && !tn) throw ConfigError(fmt::format("{}: unrecognised CSV header", path));
    ObservableSeries s;
    std::vector<std::string> f;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        boost::algorithm::split(f, line, boost::is_any_of(","));
        if (f.size() != header.size()) throw ConfigError(fmt::format("{}:{}: wrong number of fields", path, lineno));
        if (f == header) continue; // header repeated by an appended run
        ObservableRecord r;
        try {
            if (exact) {
                r.provenance = Provenance::mc;
                r.t = std::stoi(f[0]);
                r.q = number(f[1]);
                r.value = number(f[2]);
                r.value_err = number(f[3]);
                r.s_annealed = number(f[4]);
                r.s_annealed_err = number(f[5]);
                r.s_quenched = number(f[6]);
                r.s_quenched_err = number(f[7]);
                r.realizations = std::stoull(f[8]);
                r.d = std::stoi(f[9]);
                r.N = std::stoi(f[10]);
                r.seed = std::stoull(f[11]);
                r.deficit = haar_reference_entropy(r.d, r.N, r.q) - r.s_annealed;
                r.deficit_err = r.s_annealed_err;
            } else {
                r.provenance = Provenance::tn;
                r.t = std::stoi(f[0]);
                if (f[1] == "ipr") r.kind = ValueKind::ipr;
                else if (f[1] == "purity") r.kind = ValueKind::purity;
                else if (f[1] == "ipr_bipartition_sum") r.kind = ValueKind::bipartition_sum;
                else throw ConfigError(fmt::format("{}:{}: unknown value kind {}", path, lineno, f[1]));
                r.value = number(f[2]);
                r.d = std::stoi(f[4]);
                r.N = std::stoi(f[5]);
                r.q = number(f[6]);
                r.eps = number(f[7]);
                r.chi_max_used = std::stoi(f[8]);
                if (r.kind != ValueKind::purity && r.q > 1) {
                    r.deficit = number(f[3]) / (r.q - 1.0);
                    r.deficit_err = tn_deficit_error(r.N, r.t, r.q, r.eps);
                }
            }
        } catch (const std::logic_error &e) {
            if (dynamic_cast<const ConfigError *>(&e)) throw;
            throw ConfigError(fmt::format("{}:{}: {}", path, lineno, e.what()));
        }
        s.append(r);
    }
    return s;
}

std::string cell(double x) { return std::isnan(x) ? std::string() : fmt::format("{}", x); }
std::string cell(std::int64_t x) { return fmt::format("{}", x); }

} // namespace qdeloc::harness
