#include "qdeloc/permutations.hpp"

#include "qdeloc/errors.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qdeloc::perm {

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
    std::vector<char> seen(images_.size(), 0);
    for (int v : images_) {
        if (v < 0 || v >= order() || seen[static_cast<std::size_t>(v)])
            throw DomainError(fmt::format("not a permutation: [{}]", fmt::join(images_, ",")));
        seen[static_cast<std::size_t>(v)] = 1;
    }
}

Permutation Permutation::identity(int q) {
    std::vector<int> im(static_cast<std::size_t>(q));
    std::iota(im.begin(), im.end(), 0);
    return Permutation(std::move(im));
}

Permutation Permutation::cycle(int q) {
    std::vector<int> im(static_cast<std::size_t>(q));
    for (int k = 0; k < q; ++k) im[static_cast<std::size_t>(k)] = (k + 1) % q;
    return Permutation(std::move(im));
}

Permutation Permutation::compose(const Permutation &rhs) const {
    if (rhs.order() != order()) throw DomainError("composing permutations of different order");
    std::vector<int> im(images_.size());
    for (int k = 0; k < order(); ++k) im[static_cast<std::size_t>(k)] = (*this)(rhs(k));
    return Permutation(std::move(im));
}

Permutation Permutation::inverse() const {
    std::vector<int> im(images_.size());
    for (int k = 0; k < order(); ++k) im[static_cast<std::size_t>((*this)(k))] = k;
    return Permutation(std::move(im));
}

std::vector<int> Permutation::cycle_type() const {
    std::vector<char> visited(images_.size(), 0);
    std::vector<int> lengths;
    for (int start = 0; start < order(); ++start) {
        if (visited[static_cast<std::size_t>(start)]) continue;
        int len = 0;
        for (int k = start; !visited[static_cast<std::size_t>(k)]; k = (*this)(k)) {
            visited[static_cast<std::size_t>(k)] = 1;
            ++len;
        }
        lengths.push_back(len);
    }
    std::sort(lengths.begin(), lengths.end(), std::greater<>());
    return lengths;
}

int Permutation::cycle_count() const { return static_cast<int>(cycle_type().size()); }

PermutationTable::PermutationTable(int q) : order_(q) {
    if (q < 1 || q > kMaxOrder)
        throw CapacityError(fmt::format("permutation group order q={} outside supported range [1, {}]", q, kMaxOrder));

    std::vector<int> im(static_cast<std::size_t>(q));
    std::iota(im.begin(), im.end(), 0);
    do {
        elements_.emplace_back(im);
    } while (std::next_permutation(im.begin(), im.end()));

    const std::size_t n = elements_.size();
    compose_.resize(n * n);
    inverse_.resize(n);
    cycles_.resize(n);
    class_of_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            compose_[i * n + j] = index_of(elements_[i].compose(elements_[j]));
        inverse_[i] = index_of(elements_[i].inverse());
        auto type = elements_[i].cycle_type();
        cycles_[i] = static_cast<int>(type.size());
        auto it = std::find(class_types_.begin(), class_types_.end(), type);
        if (it == class_types_.end()) {
            class_types_.push_back(type);
            class_members_.emplace_back();
            it = class_types_.end() - 1;
        }
        const auto c = static_cast<std::size_t>(it - class_types_.begin());
        class_of_[i] = static_cast<int>(c);
        class_members_[c].push_back(static_cast<int>(i));
    }
    cycle_index_ = index_of(Permutation::cycle(q));
}

int PermutationTable::index_of(const Permutation &p) const {
    // Lexicographic order makes the element list sorted.
    auto it = std::lower_bound(elements_.begin(), elements_.end(), p);
    if (it == elements_.end() || !(*it == p)) throw DomainError("permutation not in table");
    return static_cast<int>(it - elements_.begin());
}

PermutationTable build_group(int q) { return PermutationTable(q); }

WeingartenTable::WeingartenTable(const PermutationTable &table, std::int64_t dimension,
                                 std::vector<Rational> class_values)
    : dimension_(dimension), order_(table.order()), class_values_(std::move(class_values)) {
    if (static_cast<int>(class_values_.size()) != table.class_count())
        throw ConfigError("Weingarten class values do not match the permutation table");
    class_of_.resize(static_cast<std::size_t>(table.size()));
    values_.resize(static_cast<std::size_t>(table.size()));
    for (int i = 0; i < table.size(); ++i) {
        class_of_[static_cast<std::size_t>(i)] = table.class_of(i);
        values_[static_cast<std::size_t>(i)] = static_cast<double>(class_values_[static_cast<std::size_t>(table.class_of(i))]);
    }
}

const Rational &WeingartenTable::exact(int element) const {
    return class_values_[static_cast<std::size_t>(class_of_[static_cast<std::size_t>(element)])];
}

Rational WeingartenTable::sum() const {
    Rational s = 0;
    for (std::size_t i = 0; i < class_of_.size(); ++i) s += class_values_[static_cast<std::size_t>(class_of_[i])];
    return s;
}

double WeingartenTable::gram_residual(const PermutationTable &table) const {
    if (table.order() != order_) throw ConfigError("table order does not match Weingarten table");
    const int n = table.size();
    const auto D = static_cast<double>(dimension_);
    std::vector<double> powers(static_cast<std::size_t>(order_) + 1);
    for (int k = 0; k <= order_; ++k) powers[static_cast<std::size_t>(k)] = std::pow(D, k);
    double worst = 0.0;
    for (int s = 0; s < n; ++s) {
        for (int t = 0; t < n; ++t) {
            // Accumulate as long double: entries of G reach D^q while the result is O(1).
            long double acc = 0.0L;
            for (int w = 0; w < n; ++w) {
                const int sw = table.compose(s, table.inverse(w));
                const int wt = table.compose(w, table.inverse(t));
                acc += static_cast<long double>(powers[static_cast<std::size_t>(table.cycle_count(sw))]) *
                       static_cast<long double>(values_[static_cast<std::size_t>(wt)]);
            }
            const double target = (s == t) ? 1.0 : 0.0;
            worst = std::max(worst, static_cast<double>(std::fabs(acc - target)));
        }
    }
    return worst;
}

nlohmann::json WeingartenTable::to_json(const PermutationTable &table) const {
    nlohmann::json entries = nlohmann::json::array();
    for (int c = 0; c < table.class_count(); ++c) {
        const Rational &v = class_values_[static_cast<std::size_t>(c)];
        entries.push_back({{"cycle_type", table.class_cycle_type(c)},
                           {"value_num", boost::multiprecision::numerator(v).str()},
                           {"value_den", boost::multiprecision::denominator(v).str()}});
    }
    return {{"D", dimension_}, {"q", order_}, {"entries", entries}};
}

Rational weingarten_sum_rule(std::int64_t dimension, int q) {
    boost::multiprecision::cpp_int den = 1;
    for (int k = 0; k < q; ++k) den *= dimension + k;
    return Rational(1) / Rational(den);
}

namespace {

// Exact Gauss-Jordan elimination; a column without a nonzero pivot means the system is singular.
std::vector<Rational> solve_exact(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::int64_t D, int q) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && a[pivot][col] == 0) ++pivot;
        if (pivot == n)
            throw DegeneracyError(fmt::format("Weingarten Gram system is singular for D={}, q={}", D, q));
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || a[row][col] == 0) continue;
            const Rational f = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

} // namespace

WeingartenTable weingarten(const PermutationTable &table, std::int64_t dimension) {
    const int q = table.order();
    if (dimension < 2) throw DomainError(fmt::format("Weingarten dimension D={} must be >= 2", dimension));
    if (dimension < q)
        throw DegeneracyError(fmt::format("Weingarten Gram system is singular for D={}, q={} (D < q)", dimension, q));

    // Wg is a class function, so the q! x q! system sum_r Wg(r) D^{#(r t)} = delta_{t,e}
    // collapses to one equation per class of t and one unknown per class of r.
    const int nc = table.class_count();
    std::vector<boost::multiprecision::cpp_int> powers(static_cast<std::size_t>(q) + 1);
    powers[0] = 1;
    for (int k = 1; k <= q; ++k) powers[static_cast<std::size_t>(k)] = powers[static_cast<std::size_t>(k) - 1] * dimension;

    std::vector<std::vector<Rational>> a(static_cast<std::size_t>(nc), std::vector<Rational>(static_cast<std::size_t>(nc)));
    std::vector<Rational> b(static_cast<std::size_t>(nc));
    for (int ct = 0; ct < nc; ++ct) {
        const int t = table.class_members(ct).front();
        for (int cr = 0; cr < nc; ++cr) {
            boost::multiprecision::cpp_int acc = 0;
            for (int r : table.class_members(cr)) acc += powers[static_cast<std::size_t>(table.cycle_count(table.compose(r, t)))];
            a[static_cast<std::size_t>(ct)][static_cast<std::size_t>(cr)] = Rational(acc);
        }
        b[static_cast<std::size_t>(ct)] = (t == PermutationTable::identity_index()) ? 1 : 0;
    }
    return WeingartenTable(table, dimension, solve_exact(std::move(a), std::move(b), dimension, q));
}

double dual_weight(const PermutationTable &table, const WeingartenTable &wg, int sigma, int tau) {
    if (table.order() != wg.order()) throw ConfigError("permutation table and Weingarten table have different order");
    if (sigma < 0 || sigma >= table.size() || tau < 0 || tau >= table.size())
        throw DomainError("permutation index outside table");
    return wg.value(table.compose(sigma, table.inverse(tau)));
}

} // namespace qdeloc::perm
