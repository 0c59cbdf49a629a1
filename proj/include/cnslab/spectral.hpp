// SPDX-License-Identifier: Apache-2.0
//
// Spectral calculus on GridFields: transforms, exact differentiation of the
// trigonometric interpolant, 2/3-rule dealiasing, off-grid evaluation, grid
// quadrature and L^p norms, and the pointwise tensor algebra used by the
// solvers.
//
// Conventions (matching the usual fluid-dynamics notation):
//   (Du)_ij = d_j u^i          jacobian()
//   (grad u)_ij = d_i u^j      nabla() == transpose(jacobian())
//   (div M)^j = sum_i d_i M_ij divergence() of a matrix field
//   D(u) = (Du + t(Du))/2      deformation()

#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "cnslab/fft.hpp"

namespace cnslab {

inline GridField forward_transform(const GridField& f) {
    f.require(Repr::physical);
    GridField out(f.grid(), f.rank(), Repr::spectral);
    std::vector<cplx> buf(f.size());
    for (int c = 0; c < f.components(); ++c) {
        const auto& src = f.real_data(c);
        for (std::size_t p = 0; p < f.size(); ++p) buf[p] = cplx(src[p], 0.0);
        detail::plan_for(f.grid()).execute(buf, true);
        out.spec_data(c) = buf;
    }
    return out;
}

// Real part of the inverse DFT; imaginary residue of conjugate-symmetric
// input is roundoff and is dropped.
inline GridField inverse_transform(const GridField& f) {
    f.require(Repr::spectral);
    GridField out(f.grid(), f.rank(), Repr::physical);
    std::vector<cplx> buf(f.size());
    for (int c = 0; c < f.components(); ++c) {
        buf = f.spec_data(c);
        detail::plan_for(f.grid()).execute(buf, false);
        auto& dst = out.real_data(c);
        for (std::size_t p = 0; p < f.size(); ++p) dst[p] = buf[p].real();
    }
    return out;
}

inline GridField to_spectral(const GridField& f) {
    return f.repr() == Repr::spectral ? f : forward_transform(f);
}
inline GridField to_physical(const GridField& f) {
    return f.repr() == Repr::physical ? f : inverse_transform(f);
}

namespace detail {

// i*xi multiplier along `axis`; the Nyquist bin is zeroed so odd derivatives
// of real fields stay real.
inline void derivative_multiplier(const TorusGrid& g, int axis, std::vector<cplx>& data) {
    const int n = g.points_per_axis();
    for (std::size_t p = 0; p < data.size(); ++p) {
        auto idx = g.unflatten(p);
        const int k = g.freq_index(idx[static_cast<std::size_t>(axis)]);
        if (k == -n / 2) {
            data[p] = cplx(0.0, 0.0);
            continue;
        }
        const double xi = kTwoPi / g.period(axis) * k;
        data[p] *= cplx(0.0, xi);
    }
}

}  // namespace detail

// d/dx_axis of one component, returned as a scalar spectral field.
inline GridField partial_derivative(const GridField& f, int comp, int axis) {
    GridField fs = to_spectral(f);
    GridField out(f.grid(), Rank::scalar, Repr::spectral);
    out.spec_data(0) = fs.spec_data(comp);
    detail::derivative_multiplier(f.grid(), axis, out.spec_data(0));
    return out;
}

inline GridField gradient(const GridField& f) {
    f.require(Repr::physical);
    if (f.rank() != Rank::scalar) throw std::logic_error("gradient: scalar field expected");
    GridField fs = forward_transform(f);
    GridField out(f.grid(), Rank::vector, Repr::spectral);
    for (int d = 0; d < f.grid().dim(); ++d) {
        out.spec_data(d) = fs.spec_data(0);
        detail::derivative_multiplier(f.grid(), d, out.spec_data(d));
    }
    return inverse_transform(out);
}

// (Du)_ij = d_j u^i.
inline GridField jacobian(const GridField& u) {
    if (u.rank() != Rank::vector) throw std::logic_error("jacobian: vector field expected");
    GridField us = to_spectral(u);
    const int n = u.grid().dim();
    GridField out(u.grid(), Rank::matrix, Repr::spectral);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            out.spec_data(i * n + j) = us.spec_data(i);
            detail::derivative_multiplier(u.grid(), j, out.spec_data(i * n + j));
        }
    return inverse_transform(out);
}

inline GridField transpose(const GridField& m) {
    if (m.rank() != Rank::matrix) throw std::logic_error("transpose: matrix field expected");
    GridField out = m;
    const int n = m.grid().dim();
    if (m.repr() == Repr::physical) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out.real_data(i * n + j) = m.real_data(j * n + i);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out.spec_data(i * n + j) = m.spec_data(j * n + i);
    }
    return out;
}

// (grad u)_ij = d_i u^j = t(Du).
inline GridField nabla(const GridField& u) { return transpose(jacobian(u)); }

inline GridField deformation(const GridField& u) {
    GridField du = jacobian(u);
    GridField out = du;
    out += transpose(du);
    out *= 0.5;
    return out;
}

inline GridField divergence(const GridField& f) {
    const int n = f.grid().dim();
    GridField fs = to_spectral(f);
    if (f.rank() == Rank::vector) {
        GridField out(f.grid(), Rank::scalar, Repr::spectral);
        for (int d = 0; d < n; ++d) {
            std::vector<cplx> tmp = fs.spec_data(d);
            detail::derivative_multiplier(f.grid(), d, tmp);
            for (std::size_t p = 0; p < f.size(); ++p) out.spec_data(0)[p] += tmp[p];
        }
        return inverse_transform(out);
    }
    if (f.rank() == Rank::matrix) {
        // (div M)^j = sum_i d_i M_ij
        GridField out(f.grid(), Rank::vector, Repr::spectral);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                std::vector<cplx> tmp = fs.spec_data(i * n + j);
                detail::derivative_multiplier(f.grid(), i, tmp);
                for (std::size_t p = 0; p < f.size(); ++p) out.spec_data(j)[p] += tmp[p];
            }
        return inverse_transform(out);
    }
    throw std::logic_error("divergence: vector or matrix field expected");
}

inline GridField laplacian(const GridField& f) {
    GridField fs = to_spectral(f);
    const TorusGrid& g = f.grid();
    for (int c = 0; c < fs.components(); ++c) {
        auto& data = fs.spec_data(c);
        for (std::size_t p = 0; p < data.size(); ++p) {
            auto k = g.freq_indices(p);
            double xi2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                double w = kTwoPi / g.period(d) * k[static_cast<std::size_t>(d)];
                xi2 += w * w;
            }
            data[p] *= -xi2;
        }
    }
    return inverse_transform(fs);
}

// All second partials of each component, one matrix field per component.
inline std::vector<GridField> hessian(const GridField& f) {
    GridField fs = to_spectral(f);
    const int n = f.grid().dim();
    std::vector<GridField> out;
    out.reserve(static_cast<std::size_t>(f.components()));
    for (int c = 0; c < f.components(); ++c) {
        GridField h(f.grid(), Rank::matrix, Repr::spectral);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                std::vector<cplx> tmp = fs.spec_data(c);
                detail::derivative_multiplier(f.grid(), i, tmp);
                detail::derivative_multiplier(f.grid(), j, tmp);
                h.spec_data(i * n + j) = std::move(tmp);
            }
        out.push_back(inverse_transform(h));
    }
    return out;
}

// Zeroes all modes with any axis index above 2/3 of the Nyquist index.
inline GridField dealias(const GridField& f) {
    f.require(Repr::spectral);
    GridField out = f;
    const TorusGrid& g = f.grid();
    const int n = g.points_per_axis();
    for (int c = 0; c < out.components(); ++c) {
        auto& data = out.spec_data(c);
        for (std::size_t p = 0; p < data.size(); ++p) {
            auto k = g.freq_indices(p);
            for (int d = 0; d < g.dim(); ++d)
                if (3 * std::abs(k[static_cast<std::size_t>(d)]) > n) {
                    data[p] = cplx(0.0, 0.0);
                    break;
                }
        }
    }
    return out;
}

inline GridField dealias_phys(const GridField& f) {
    return inverse_transform(dealias(to_spectral(f)));
}

// Exact evaluation of the band-limited trigonometric interpolant at arbitrary
// points (wrapped periodically). The Nyquist bin is evaluated as cos so grid
// values are reproduced and results stay real.
inline std::vector<double> evaluate_offgrid(const GridField& f,
                                            std::span<const std::array<double, 3>> points,
                                            int comp) {
    GridField fs = to_spectral(f);
    const TorusGrid& g = f.grid();
    const int n = g.points_per_axis();
    const int dim = g.dim();
    const auto& c = fs.spec_data(comp);
    std::vector<double> out(points.size(), 0.0);
    std::vector<std::vector<cplx>> phase(static_cast<std::size_t>(dim), std::vector<cplx>(static_cast<std::size_t>(n)));
    for (std::size_t q = 0; q < points.size(); ++q) {
        for (int d = 0; d < dim; ++d) {
            const double L = g.period(d);
            double x = std::fmod(points[q][static_cast<std::size_t>(d)], L);
            if (x < 0) x += L;
            for (int b = 0; b < n; ++b) {
                const int k = g.freq_index(b);
                const double arg = kTwoPi / L * k * x;
                phase[static_cast<std::size_t>(d)][static_cast<std::size_t>(b)] =
                    (k == -n / 2) ? cplx(std::cos(arg), 0.0) : cplx(std::cos(arg), std::sin(arg));
            }
        }
        cplx acc(0.0, 0.0);
        if (dim == 2) {
            for (int b0 = 0; b0 < n; ++b0) {
                cplx s(0.0, 0.0);
                const std::size_t row = static_cast<std::size_t>(b0) * static_cast<std::size_t>(n);
                for (int b1 = 0; b1 < n; ++b1) s += c[row + static_cast<std::size_t>(b1)] * phase[1][static_cast<std::size_t>(b1)];
                acc += s * phase[0][static_cast<std::size_t>(b0)];
            }
        } else {
            for (int b0 = 0; b0 < n; ++b0) {
                cplx s0(0.0, 0.0);
                for (int b1 = 0; b1 < n; ++b1) {
                    cplx s1(0.0, 0.0);
                    const std::size_t row = (static_cast<std::size_t>(b0) * static_cast<std::size_t>(n) + static_cast<std::size_t>(b1)) * static_cast<std::size_t>(n);
                    for (int b2 = 0; b2 < n; ++b2) s1 += c[row + static_cast<std::size_t>(b2)] * phase[2][static_cast<std::size_t>(b2)];
                    s0 += s1 * phase[1][static_cast<std::size_t>(b1)];
                }
                acc += s0 * phase[0][static_cast<std::size_t>(b0)];
            }
        }
        out[q] = acc.real();
    }
    return out;
}

// --- quadrature and norms --------------------------------------------------

inline double mean(const GridField& f, int comp = 0) {
    f.require(Repr::physical);
    double s = 0.0;
    for (double v : f.real_data(comp)) s += v;
    return s / static_cast<double>(f.size());
}

inline double integral(const GridField& f, int comp = 0) {
    return mean(f, comp) * f.grid().volume();
}

// L^p norm over the torus with the pointwise Frobenius magnitude across all
// components of all listed fields; uniform Riemann quadrature (exact for
// band-limited integrands). p = infinity gives the max norm.
inline double lp_norm_joint(std::span<const GridField> fields, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (fields.empty()) return 0.0;
    const GridField& f0 = fields[0];
    f0.require(Repr::physical);
    const std::size_t npts = f0.size();
    const bool inf = std::isinf(p);
    double acc = 0.0;
    for (std::size_t q = 0; q < npts; ++q) {
        double frob2 = 0.0;
        for (const GridField& f : fields) {
            f.require(Repr::physical);
            for (int c = 0; c < f.components(); ++c) {
                const double v = f.real_data(c)[q];
                frob2 += v * v;
            }
        }
        const double m = std::sqrt(frob2);
        if (inf)
            acc = std::max(acc, m);
        else
            acc += std::pow(m, p);
    }
    if (inf) return acc;
    return std::pow(acc * f0.grid().cell_volume(), 1.0 / p);
}

inline double lp_norm(const GridField& f, double p) {
    return lp_norm_joint(std::span<const GridField>(&f, 1), p);
}

// --- pointwise algebra (physical representation) ----------------------------

namespace detail {
inline void require_phys_pair(const GridField& a, const GridField& b) {
    a.require(Repr::physical);
    b.require(Repr::physical);
    a.require_same_grid(b);
}
}  // namespace detail

// scalar * (scalar|vector|matrix), componentwise.
inline GridField multiply(const GridField& s, const GridField& f) {
    detail::require_phys_pair(s, f);
    if (s.rank() != Rank::scalar) throw std::logic_error("multiply: first factor must be scalar");
    GridField out = f;
    const auto& sv = s.real_data(0);
    for (int c = 0; c < out.components(); ++c) {
        auto& d = out.real_data(c);
        for (std::size_t p = 0; p < d.size(); ++p) d[p] *= sv[p];
    }
    return out;
}

inline GridField divide(const GridField& f, const GridField& s) {
    detail::require_phys_pair(f, s);
    if (s.rank() != Rank::scalar) throw std::logic_error("divide: divisor must be scalar");
    GridField out = f;
    const auto& sv = s.real_data(0);
    for (int c = 0; c < out.components(); ++c) {
        auto& d = out.real_data(c);
        for (std::size_t p = 0; p < d.size(); ++p) d[p] /= sv[p];
    }
    return out;
}

inline GridField mat_vec(const GridField& m, const GridField& v) {
    detail::require_phys_pair(m, v);
    const int n = m.grid().dim();
    GridField out(m.grid(), Rank::vector, Repr::physical);
    for (int i = 0; i < n; ++i) {
        auto& d = out.real_data(i);
        for (int j = 0; j < n; ++j) {
            const auto& mij = m.real_data(i * n + j);
            const auto& vj = v.real_data(j);
            for (std::size_t p = 0; p < d.size(); ++p) d[p] += mij[p] * vj[p];
        }
    }
    return out;
}

inline GridField mat_mat(const GridField& a, const GridField& b) {
    detail::require_phys_pair(a, b);
    const int n = a.grid().dim();
    GridField out(a.grid(), Rank::matrix, Repr::physical);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto& d = out.real_data(i * n + j);
            for (int k = 0; k < n; ++k) {
                const auto& aik = a.real_data(i * n + k);
                const auto& bkj = b.real_data(k * n + j);
                for (std::size_t p = 0; p < d.size(); ++p) d[p] += aik[p] * bkj[p];
            }
        }
    return out;
}

// Trace product A:B = sum_ij A_ij B_ji.
inline GridField trace_contract(const GridField& a, const GridField& b) {
    detail::require_phys_pair(a, b);
    const int n = a.grid().dim();
    GridField out(a.grid(), Rank::scalar, Repr::physical);
    auto& d = out.real_data(0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& aij = a.real_data(i * n + j);
            const auto& bji = b.real_data(j * n + i);
            for (std::size_t p = 0; p < d.size(); ++p) d[p] += aij[p] * bji[p];
        }
    return out;
}

inline GridField vec_dot(const GridField& u, const GridField& v) {
    detail::require_phys_pair(u, v);
    GridField out(u.grid(), Rank::scalar, Repr::physical);
    auto& d = out.real_data(0);
    for (int c = 0; c < u.components(); ++c) {
        const auto& uc = u.real_data(c);
        const auto& vc = v.real_data(c);
        for (std::size_t p = 0; p < d.size(); ++p) d[p] += uc[p] * vc[p];
    }
    return out;
}

template <class F>
GridField apply_pointwise(const GridField& f, F&& fn) {
    f.require(Repr::physical);
    GridField out = f;
    for (int c = 0; c < out.components(); ++c)
        for (auto& v : out.real_data(c)) v = fn(v);
    return out;
}

inline GridField scale_matrix(const GridField& m, double s) {
    GridField out = m;
    out *= s;
    return out;
}

// m + s*Id for matrix fields.
inline GridField add_identity(const GridField& m, double s) {
    m.require(Repr::physical);
    GridField out = m;
    const int n = m.grid().dim();
    for (int i = 0; i < n; ++i) {
        auto& d = out.real_data(i * n + i);
        for (auto& v : d) v += s;
    }
    return out;
}

}  // namespace cnslab
