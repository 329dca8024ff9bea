#pragma once

// Symmetric-group tables and Weingarten coefficients for q-fold Haar moments.

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace qdeloc::perm {

using Rational = boost::multiprecision::cpp_rational;

/// A bijection on {0, ..., q-1}, stored as its image sequence k -> images[k].
class Permutation {
  public:
    explicit Permutation(std::vector<int> images);

    static Permutation identity(int q);
    /// The full cycle k -> k+1 (mod q).
    static Permutation cycle(int q);

    [[nodiscard]] int order() const { return static_cast<int>(images_.size()); }
    [[nodiscard]] int operator()(int k) const { return images_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] std::span<const int> images() const { return images_; }

    /// (*this o rhs)(k) = (*this)(rhs(k)).
    [[nodiscard]] Permutation compose(const Permutation &rhs) const;
    [[nodiscard]] Permutation inverse() const;
    [[nodiscard]] int cycle_count() const;
    /// Cycle lengths in non-increasing order; sums to q.
    [[nodiscard]] std::vector<int> cycle_type() const;

    friend bool operator==(const Permutation &, const Permutation &) = default;
    friend auto operator<=>(const Permutation &, const Permutation &) = default;

  private:
    std::vector<int> images_;
};

/// All q! elements of S_q in lexicographic order of their image sequences
/// (identity at index 0), with precomputed products, inverses and classes.
class PermutationTable {
  public:
    static constexpr int kMaxOrder = 6;

    explicit PermutationTable(int q);

    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] int size() const { return static_cast<int>(elements_.size()); }
    [[nodiscard]] const Permutation &element(int i) const { return elements_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] std::span<const Permutation> elements() const { return elements_; }
    [[nodiscard]] int index_of(const Permutation &p) const;

    /// Index of element(i) o element(j).
    [[nodiscard]] int compose(int i, int j) const { return compose_[flat(i, j)]; }
    [[nodiscard]] int inverse(int i) const { return inverse_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] int cycle_count(int i) const { return cycles_[static_cast<std::size_t>(i)]; }

    [[nodiscard]] static constexpr int identity_index() { return 0; }
    /// Index of the full cycle (1 2 ... q).
    [[nodiscard]] int cycle_index() const { return cycle_index_; }

    // Conjugacy classes, labelled by cycle type in order of first appearance.
    [[nodiscard]] int class_count() const { return static_cast<int>(class_types_.size()); }
    [[nodiscard]] int class_of(int i) const { return class_of_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<int> &class_cycle_type(int c) const { return class_types_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] const std::vector<int> &class_members(int c) const { return class_members_[static_cast<std::size_t>(c)]; }

  private:
    [[nodiscard]] std::size_t flat(int i, int j) const {
        return static_cast<std::size_t>(i) * elements_.size() + static_cast<std::size_t>(j);
    }

    int order_;
    int cycle_index_ = 0;
    std::vector<Permutation> elements_;
    std::vector<int> compose_;
    std::vector<int> inverse_;
    std::vector<int> cycles_;
    std::vector<int> class_of_;
    std::vector<std::vector<int>> class_types_;
    std::vector<std::vector<int>> class_members_;
};

/// Throws CapacityError unless 1 <= q <= PermutationTable::kMaxOrder.
PermutationTable build_group(int q);

/// Wg(D; sigma) for a fixed unitary dimension D and moment order q. Values are
/// exact rationals (one per conjugacy class) with a cached double per element.
class WeingartenTable {
  public:
    WeingartenTable(const PermutationTable &table, std::int64_t dimension, std::vector<Rational> class_values);

    [[nodiscard]] std::int64_t dimension() const { return dimension_; }
    [[nodiscard]] int order() const { return order_; }

    [[nodiscard]] double value(int element) const { return values_[static_cast<std::size_t>(element)]; }
    [[nodiscard]] const Rational &exact(int element) const;
    [[nodiscard]] const Rational &class_value(int c) const { return class_values_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    /// Exact sum over the group of Wg(D; sigma).
    [[nodiscard]] Rational sum() const;

    /// max |G Wg - I| with G_{s,t} = D^{#(s t^-1)} and Wg_{s,t} = Wg(D; s t^-1), in double precision.
    [[nodiscard]] double gram_residual(const PermutationTable &table) const;

    /// {D, q, entries: [{cycle_type, value_num, value_den}]}; numerator/denominator as decimal strings.
    [[nodiscard]] nlohmann::json to_json(const PermutationTable &table) const;

  private:
    std::int64_t dimension_;
    int order_;
    std::vector<int> class_of_;
    std::vector<Rational> class_values_;
    std::vector<double> values_;
};

/// Solves the Gram system for the Weingarten function. D < q leaves the Gram
/// matrix singular and raises DegeneracyError.
WeingartenTable weingarten(const PermutationTable &table, std::int64_t dimension);

/// (D-1)!/(D+q-1)! = 1/(D (D+1) ... (D+q-1)).
Rational weingarten_sum_rule(std::int64_t dimension, int q);

/// Coefficient of <<tau| in the dual state <<~sigma|, i.e. Wg(D; sigma tau^-1).
double dual_weight(const PermutationTable &table, const WeingartenTable &wg, int sigma, int tau);

} // namespace qdeloc::perm
