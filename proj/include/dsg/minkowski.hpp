#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace dsg {

// Ambient Minkowski vectors.  Slot 0 is timelike, inner product
// diag(-1, +1, ..., +1).  Dimension is n+2 with n <= 3, so a fixed
// five-slot array covers every case.
struct MinkVec {
    std::array<double, 5> v{};
    int dim = 0;

    MinkVec() = default;
    explicit MinkVec(int d) : dim(d) { v.fill(0.0); }

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

    MinkVec& operator+=(const MinkVec& o) {
        for (int i = 0; i < dim; ++i) v[i] += o.v[i];
        return *this;
    }
    MinkVec& operator-=(const MinkVec& o) {
        for (int i = 0; i < dim; ++i) v[i] -= o.v[i];
        return *this;
    }
    MinkVec& operator*=(double s) {
        for (int i = 0; i < dim; ++i) v[i] *= s;
        return *this;
    }
};

inline MinkVec operator+(MinkVec a, const MinkVec& b) { return a += b; }
inline MinkVec operator-(MinkVec a, const MinkVec& b) { return a -= b; }
inline MinkVec operator*(double s, MinkVec a) { return a *= s; }

inline double mink_dot(const MinkVec& a, const MinkVec& b) {
    double s = -a[0] * b[0];
    for (int i = 1; i < a.dim; ++i) s += a[i] * b[i];
    return s;
}

/// Euclidean norm of all components; used for residual reporting where a
/// positive definite magnitude is wanted.
inline double euclid_norm(const MinkVec& a) {
    double s = 0.0;
    for (int i = 0; i < a.dim; ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

/// Linear isometry of the ambient space, stored dense.
struct MinkTransform {
    std::array<std::array<double, 5>, 5> m{};
    int dim = 0;

    static MinkTransform identity(int d) {
        MinkTransform t;
        t.dim = d;
        for (int i = 0; i < d; ++i) t.m[i][i] = 1.0;
        return t;
    }

    MinkVec apply(const MinkVec& x) const {
        MinkVec y(dim);
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += m[i][j] * x[j];
            y[i] = s;
        }
        return y;
    }
};

inline MinkTransform compose(const MinkTransform& a, const MinkTransform& b) {
    MinkTransform c;
    c.dim = a.dim;
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < a.dim; ++k) s += a.m[i][k] * b.m[k][j];
            c.m[i][j] = s;
        }
    return c;
}

/// Boost of rapidity chi in the plane spanned by the time axis and the unit
/// spatial direction d (components d[1..dim-1], d[0] ignored).
inline MinkTransform boost(int dim, const MinkVec& d, double chi) {
    MinkTransform t = MinkTransform::identity(dim);
    const double ch = std::cosh(chi), sh = std::sinh(chi);
    t.m[0][0] = ch;
    for (int i = 1; i < dim; ++i) {
        t.m[0][i] = -sh * d[i];
        t.m[i][0] = -sh * d[i];
        for (int j = 1; j < dim; ++j) t.m[i][j] = (i == j ? 1.0 : 0.0) + (ch - 1.0) * d[i] * d[j];
    }
    return t;
}

/// Spatial rotation taking unit spatial vector a to unit spatial vector b
/// (rotation in their common plane, identity on the complement and on E0).
inline MinkTransform rotation_between(int dim, const MinkVec& a, const MinkVec& b) {
    MinkTransform t = MinkTransform::identity(dim);
    double c = 0.0;
    for (int i = 1; i < dim; ++i) c += a[i] * b[i];
    // b - (a.b) a, normalized: second leg of the rotation plane
    MinkVec w(dim);
    double wn = 0.0;
    for (int i = 1; i < dim; ++i) {
        w[i] = b[i] - c * a[i];
        wn += w[i] * w[i];
    }
    wn = std::sqrt(wn);
    if (wn < 1e-14) {
        if (c > 0.0) return t; // already aligned
        // antipodal: rotate by pi in the plane spanned by a and any e _|_ a
        MinkVec e(dim);
        int k = 1;
        double best = std::abs(a[1]);
        for (int i = 2; i < dim; ++i)
            if (std::abs(a[i]) < best) { best = std::abs(a[i]); k = i; }
        e[k] = 1.0;
        double ea = 0.0;
        for (int i = 1; i < dim; ++i) ea += e[i] * a[i];
        double en = 0.0;
        for (int i = 1; i < dim; ++i) {
            e[i] -= ea * a[i];
            en += e[i] * e[i];
        }
        en = std::sqrt(en);
        for (int i = 1; i < dim; ++i) e[i] /= en;
        for (int i = 1; i < dim; ++i)
            for (int j = 1; j < dim; ++j)
                t.m[i][j] -= 2.0 * (a[i] * a[j] + e[i] * e[j]);
        return t;
    }
    for (int i = 1; i < dim; ++i) w[i] /= wn;
    const double s = wn; // sin(theta), c = cos(theta)
    for (int i = 1; i < dim; ++i)
        for (int j = 1; j < dim; ++j)
            t.m[i][j] += (c - 1.0) * (a[i] * a[j] + w[i] * w[j]) + s * (w[i] * a[j] - a[i] * w[j]);
    return t;
}

} // namespace dsg
