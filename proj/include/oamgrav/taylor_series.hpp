#pragma once

// Truncated power series with arbitrary coefficient rings.
//
// A TruncatedSeries<T> holds the Taylor coefficients c_0..c_N of a function
// of one variable. T may itself be a TruncatedSeries, which gives nested
// multivariate series: TruncatedSeries<TruncatedSeries<std::complex<double>>>
// is a bivariate series in (outer, inner) variables. All arithmetic
// truncates at the operands' order, so extracting a mixed Taylor
// coefficient is exact up to floating-point rounding.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <vector>

namespace oamgrav {

template <class T>
class TruncatedSeries;

namespace detail {

template <class T>
struct is_series : std::false_type {};
template <class T>
struct is_series<TruncatedSeries<T>> : std::true_type {};
template <class T>
inline constexpr bool is_series_v = is_series<T>::value;

template <class T>
T zero_like(const T& proto) {
    if constexpr (is_series_v<T>) {
        return T(proto.order(), zero_like(proto[0]));
    } else {
        return T{};
    }
}

template <class T>
T inverse(const T& x) {
    if constexpr (is_series_v<T>) {
        return reciprocal(x);
    } else {
        return T{1} / x;
    }
}

template <class T>
T exponential(const T& x) {
    if constexpr (is_series_v<T>) {
        return exp(x);
    } else {
        using std::exp;
        return exp(x);
    }
}

}  // namespace detail

template <class T>
class TruncatedSeries {
public:
    using value_type = T;

    TruncatedSeries() = default;

    /// Zero series of the given order; `zero` fixes the shape of nested coefficients.
    TruncatedSeries(std::size_t order, const T& zero) : c_(order + 1, zero) {}

    static TruncatedSeries constant(std::size_t order, const T& value) {
        TruncatedSeries s(order, detail::zero_like(value));
        s.c_[0] = value;
        return s;
    }

    /// The series `value + t`, where t is this level's variable.
    static TruncatedSeries variable(std::size_t order, const T& value, const T& one) {
        TruncatedSeries s = constant(order, value);
        if (order >= 1) s.c_[1] = one;
        return s;
    }

    std::size_t order() const { return c_.size() - 1; }
    const T& operator[](std::size_t k) const { return c_[k]; }
    T& operator[](std::size_t k) { return c_[k]; }

    TruncatedSeries& operator+=(const TruncatedSeries& o) {
        truncate_to(o.order());
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
        return *this;
    }
    TruncatedSeries& operator-=(const TruncatedSeries& o) {
        truncate_to(o.order());
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
        return *this;
    }
    TruncatedSeries& operator*=(const TruncatedSeries& o) { return *this = *this * o; }

    // Scalars (anything that is not a series at this level) act on the
    // constant term for +/- and on every coefficient for * and /.
    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    TruncatedSeries& operator+=(const U& u) {
        c_[0] += u;
        return *this;
    }
    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    TruncatedSeries& operator-=(const U& u) {
        c_[0] -= u;
        return *this;
    }
    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    TruncatedSeries& operator*=(const U& u) {
        for (auto& c : c_) c *= u;
        return *this;
    }
    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    TruncatedSeries& operator/=(const U& u) {
        for (auto& c : c_) c /= u;
        return *this;
    }

    friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
    friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
    friend TruncatedSeries operator-(TruncatedSeries a) {
        for (auto& c : a.c_) c = -c;
        return a;
    }

    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
        const std::size_t n = std::min(a.order(), b.order());
        TruncatedSeries r(n, detail::zero_like(a.c_[0]));
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; i + j <= n; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
        return r;
    }

    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    friend TruncatedSeries operator+(TruncatedSeries a, const U& u) {
        return a += u;
    }
    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    friend TruncatedSeries operator-(TruncatedSeries a, const U& u) {
        return a -= u;
    }
    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    friend TruncatedSeries operator*(TruncatedSeries a, const U& u) {
        return a *= u;
    }
    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    friend TruncatedSeries operator*(const U& u, TruncatedSeries a) {
        return a *= u;
    }
    template <class U>
        requires(!std::is_same_v<std::remove_cvref_t<U>, TruncatedSeries>)
    friend TruncatedSeries operator/(TruncatedSeries a, const U& u) {
        return a /= u;
    }

    friend TruncatedSeries operator/(const TruncatedSeries& a, const TruncatedSeries& b) {
        return a * reciprocal(b);
    }

    /// exp(f) by the recurrence k·E_k = Σ_{j=1..k} j·f_j·E_{k-j}.
    friend TruncatedSeries exp(const TruncatedSeries& f) {
        const std::size_t n = f.order();
        TruncatedSeries e(n, detail::zero_like(f.c_[0]));
        e.c_[0] = detail::exponential(f.c_[0]);
        for (std::size_t k = 1; k <= n; ++k) {
            T acc = detail::zero_like(f.c_[0]);
            for (std::size_t j = 1; j <= k; ++j) acc += (f.c_[j] * e.c_[k - j]) * static_cast<double>(j);
            e.c_[k] = acc / static_cast<double>(k);
        }
        return e;
    }

    /// 1/f; the constant term must be invertible.
    friend TruncatedSeries reciprocal(const TruncatedSeries& f) {
        const std::size_t n = f.order();
        TruncatedSeries r(n, detail::zero_like(f.c_[0]));
        const T inv0 = detail::inverse(f.c_[0]);
        r.c_[0] = inv0;
        for (std::size_t k = 1; k <= n; ++k) {
            T acc = detail::zero_like(f.c_[0]);
            for (std::size_t j = 1; j <= k; ++j) acc += f.c_[j] * r.c_[k - j];
            r.c_[k] = -(inv0 * acc);
        }
        return r;
    }

    friend TruncatedSeries pow(const TruncatedSeries& f, unsigned n) {
        TruncatedSeries result = constant(f.order(), detail::zero_like(f.c_[0]));
        result.c_[0] += 1.0;
        TruncatedSeries base = f;
        while (n > 0) {
            if (n & 1u) result = result * base;
            n >>= 1u;
            if (n > 0) base = base * base;
        }
        return result;
    }

private:
    void truncate_to(std::size_t order) {
        if (order < this->order()) c_.resize(order + 1);
    }

    std::vector<T> c_;
};

using ComplexSeries = TruncatedSeries<std::complex<double>>;
using ComplexSeries2 = TruncatedSeries<ComplexSeries>;

/// Build the bivariate series `value + s·t_outer + r·t_inner`-style generators.
/// Returns the outer variable t (orders: outer, inner).
inline ComplexSeries2 outer_variable(std::size_t outer_order, std::size_t inner_order) {
    const ComplexSeries zero(inner_order, {});
    ComplexSeries one = zero;
    one[0] = 1.0;
    return ComplexSeries2::variable(outer_order, zero, one);
}

inline ComplexSeries2 inner_variable(std::size_t outer_order, std::size_t inner_order) {
    ComplexSeries t(inner_order, {});
    if (inner_order >= 1) t[1] = 1.0;
    return ComplexSeries2::constant(outer_order, t);
}

inline ComplexSeries2 bivariate_constant(std::size_t outer_order, std::size_t inner_order,
                                         std::complex<double> value) {
    ComplexSeries c(inner_order, {});
    c[0] = value;
    return ComplexSeries2::constant(outer_order, c);
}

}  // namespace oamgrav
