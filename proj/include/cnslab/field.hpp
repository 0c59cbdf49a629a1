// SPDX-License-Identifier: Apache-2.0
//
// Dense tensor fields on a TorusGrid, stored either as real physical samples
// or complex Fourier coefficients (forward transform normalized by 1/N^n so
// the zero mode is the mean).

#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cnslab/grid.hpp"

namespace cnslab {

using cplx = std::complex<double>;

enum class Rank { scalar, vector, matrix };
enum class Repr { physical, spectral };

inline int component_count(Rank r, int dim) {
    switch (r) {
        case Rank::scalar: return 1;
        case Rank::vector: return dim;
        case Rank::matrix: return dim * dim;
    }
    return 0;
}

inline const char* to_string(Rank r) {
    switch (r) {
        case Rank::scalar: return "scalar";
        case Rank::vector: return "vector";
        case Rank::matrix: return "matrix";
    }
    return "?";
}
inline const char* to_string(Repr r) { return r == Repr::physical ? "physical" : "spectral"; }

struct representation_error : std::logic_error {
    using std::logic_error::logic_error;
};

class GridField {
public:
    GridField(TorusGrid grid, Rank rank, Repr repr)
        : grid_(std::move(grid)), rank_(rank), repr_(repr) {
        const int nc = component_count(rank_, grid_.dim());
        if (repr_ == Repr::physical)
            re_.assign(static_cast<std::size_t>(nc), std::vector<double>(grid_.total_points(), 0.0));
        else
            sp_.assign(static_cast<std::size_t>(nc), std::vector<cplx>(grid_.total_points(), cplx(0.0, 0.0)));
    }

    const TorusGrid& grid() const { return grid_; }
    Rank rank() const { return rank_; }
    Repr repr() const { return repr_; }
    int components() const { return component_count(rank_, grid_.dim()); }
    std::size_t size() const { return grid_.total_points(); }

    std::vector<double>& real_data(int c = 0) {
        require(Repr::physical);
        return re_[static_cast<std::size_t>(c)];
    }
    const std::vector<double>& real_data(int c = 0) const {
        require(Repr::physical);
        return re_[static_cast<std::size_t>(c)];
    }
    std::vector<cplx>& spec_data(int c = 0) {
        require(Repr::spectral);
        return sp_[static_cast<std::size_t>(c)];
    }
    const std::vector<cplx>& spec_data(int c = 0) const {
        require(Repr::spectral);
        return sp_[static_cast<std::size_t>(c)];
    }

    // Matrix component M_ij at row i, column j.
    std::vector<double>& real_mat(int i, int j) { return real_data(i * grid_.dim() + j); }
    const std::vector<double>& real_mat(int i, int j) const { return real_data(i * grid_.dim() + j); }

    void require(Repr r) const {
        if (repr_ != r)
            throw representation_error(std::string("GridField: expected ") + to_string(r) +
                                       " representation, have " + to_string(repr_));
    }
    void require_same_grid(const GridField& o) const {
        if (grid_ != o.grid_) throw std::logic_error("GridField: grid mismatch");
    }

    // Fill a physical field from a callable f(x, component).
    template <class F>
    void fill(F&& f) {
        require(Repr::physical);
        const int nc = components();
        for (std::size_t p = 0; p < size(); ++p) {
            auto x = grid_.coord(grid_.unflatten(p));
            for (int c = 0; c < nc; ++c) re_[static_cast<std::size_t>(c)][p] = f(x, c);
        }
    }

    GridField& operator+=(const GridField& o) { return axpy(1.0, o); }
    GridField& operator-=(const GridField& o) { return axpy(-1.0, o); }
    GridField& operator*=(double s) {
        if (repr_ == Repr::physical)
            for (auto& comp : re_)
                for (auto& v : comp) v *= s;
        else
            for (auto& comp : sp_)
                for (auto& v : comp) v *= s;
        return *this;
    }
    GridField& axpy(double a, const GridField& o) {
        require_same_grid(o);
        if (rank_ != o.rank_ || repr_ != o.repr_)
            throw std::logic_error("GridField: rank/representation mismatch in axpy");
        if (repr_ == Repr::physical)
            for (std::size_t c = 0; c < re_.size(); ++c)
                for (std::size_t p = 0; p < size(); ++p) re_[c][p] += a * o.re_[c][p];
        else
            for (std::size_t c = 0; c < sp_.size(); ++c)
                for (std::size_t p = 0; p < size(); ++p) sp_[c][p] += a * o.sp_[c][p];
        return *this;
    }

    friend GridField operator+(GridField a, const GridField& b) { return a += b; }
    friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
    friend GridField operator*(double s, GridField a) { return a *= s; }

    double max_abs() const {
        double m = 0.0;
        if (repr_ == Repr::physical) {
            for (const auto& comp : re_)
                for (double v : comp) m = std::max(m, std::abs(v));
        } else {
            for (const auto& comp : sp_)
                for (const cplx& v : comp) m = std::max(m, std::abs(v));
        }
        return m;
    }

private:
    TorusGrid grid_;
    Rank rank_;
    Repr repr_;
    std::vector<std::vector<double>> re_;
    std::vector<std::vector<cplx>> sp_;
};

inline GridField scalar_field(const TorusGrid& g) { return GridField(g, Rank::scalar, Repr::physical); }
inline GridField vector_field(const TorusGrid& g) { return GridField(g, Rank::vector, Repr::physical); }
inline GridField matrix_field(const TorusGrid& g) { return GridField(g, Rank::matrix, Repr::physical); }

inline GridField constant_field(const TorusGrid& g, double value, Rank rank = Rank::scalar) {
    GridField f(g, rank, Repr::physical);
    for (int c = 0; c < f.components(); ++c)
        for (auto& v : f.real_data(c)) v = value;
    return f;
}

// Pointwise identity matrix field.
inline GridField identity_matrix_field(const TorusGrid& g) {
    GridField f(g, Rank::matrix, Repr::physical);
    for (int i = 0; i < g.dim(); ++i)
        for (auto& v : f.real_mat(i, i)) v = 1.0;
    return f;
}

inline double max_abs_diff(const GridField& a, const GridField& b) {
    GridField d = a;
    d -= b;
    return d.max_abs();
}

}  // namespace cnslab
