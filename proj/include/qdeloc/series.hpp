#pragma once

// Per-depth records from any engine, tagged with where they came from.

#include <cstdint>
#include <fstream>
#include <limits>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace qdeloc::harness {

enum class Provenance { mc, tn, oracle };
enum class ValueKind { ipr, purity, bipartition_sum };

std::string_view provenance_name(Provenance p);
std::string_view kind_name(ValueKind k);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ObservableRecord {
    Provenance provenance = Provenance::oracle;
    ValueKind kind = ValueKind::ipr;
    int d = 2;
    int N = 0;
    double q = 2.0;
    int t = 0;
    /// Left-block size for purities, -1 otherwise.
    int cut = -1;
    /// Averaged I_q (or purity).
    double value = kNaN;
    double value_err = 0.0;
    double s_annealed = kNaN;
    double s_annealed_err = 0.0;
    double s_quenched = kNaN;
    double s_quenched_err = 0.0;
    /// S^H - S_annealed for IPR records; ln(P / P^H) for q = 2 purities.
    double deficit = kNaN;
    /// Statistical error for Monte Carlo; for the tensor network, the truncation estimate
    /// sqrt(N t eps) of ln Ibar carried over to the deficit.
    double deficit_err = 0.0;
    std::uint64_t realizations = 0;
    std::uint64_t seed = 0;
    double eps = kNaN;
    int chi_max_used = 0;
};

class ObservableSeries {
  public:
    std::vector<ObservableRecord> records;

    void append(const ObservableRecord &r) { records.push_back(r); }
    void append(const ObservableSeries &other);

    /// Records matching the key, sorted by t.
    std::vector<ObservableRecord> select(Provenance p, ValueKind kind, int d, int N, double q, int cut = -1) const;
    std::vector<int> sizes() const;

    /// Records whose deficit is below -slack. Monte Carlo records are skipped (they fluctuate).
    std::vector<ObservableRecord> deficit_violations(double slack = 1e-9) const;
};

/// Haar reference S^H for an IPR record (annealed convention, q = 1 by continuation).
double haar_reference_entropy(int d, int N, double q);
/// (ln I - ln I^H)/(q - 1), the deficit S^H - S in the annealed convention. For q = 1 the
/// argument is the Shannon entropy itself.
double ipr_deficit(int d, int N, double q, double log_ipr);

/// Truncation error estimate of a TN deficit (zero at eps = 0).
double tn_deficit_error(int N, int t, double q, double eps);

/// Read back a CSV written by the exact or tensor-network engine (detected from the header).
ObservableSeries read_series_csv(const std::string &path);

/// Appends rows to a CSV file, writing the header only when the file is new or empty.
/// Every row is flushed. Thread-safe.
class CsvWriter {
  public:
    CsvWriter(const std::string &path, std::vector<std::string> header);
    void row(const std::vector<std::string> &cells);
    const std::string &path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
    std::mutex mutex_;
};

/// Shortest round-trip decimal form; NaN becomes an empty cell.
std::string cell(double x);
std::string cell(std::int64_t x);
inline std::string cell(int x) { return cell(static_cast<std::int64_t>(x)); }
inline std::string cell(std::uint64_t x) { return cell(static_cast<std::int64_t>(x)); }

} // namespace qdeloc::harness
