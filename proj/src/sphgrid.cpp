#include "icf/sphgrid.hpp"

#include "icf/error.hpp"
#include "icf/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

namespace icf::sphgrid {

SphereGrid::SphereGrid(int I, int J) : I_(I), J_(J) {
    if (I < 8 || I % 2 != 0) throw ConfigError("longitude count must be even and at least 8, got " + std::to_string(I));
    if (J < 4) throw ConfigError("latitude count must be at least 4, got " + std::to_string(J));
    const double pi = std::numbers::pi;
    dtheta_ = pi / J;
    dphi_ = 2.0 * pi / I;
    theta_.resize(J);
    sin_.resize(J);
    cos_.resize(J);
    for (int j = 0; j < J; ++j) theta_[j] = (j + 0.5) * dtheta_;
    // Mirror the southern half so that reflection across the equator is exact.
    for (int j = 0; j < (J + 1) / 2; ++j) {
        sin_[j] = sin_[J - 1 - j] = std::sin(theta_[j]);
        cos_[j] = std::cos(theta_[j]);
        cos_[J - 1 - j] = -cos_[j];
    }
    if (J % 2 == 1) cos_[J / 2] = 0.0;
    phi_.resize(I);
    for (int i = 0; i < I; ++i) phi_[i] = i * dphi_;

    double total = 0.0;
    for (int j = 0; j < J; ++j) total += sin_[j];
    weight_.resize(J);
    for (int j = 0; j < J; ++j) weight_[j] = sin_[j] / (total * I);

    cutoff_.resize(J);
    kernel_.resize(J);
    for (int j = 0; j < J; ++j) {
        cutoff_[j] = std::min(I / 2, static_cast<int>(std::floor(2.0 * J * sin_[j])));
        if (cutoff_[j] >= I / 2) continue;
        auto& w = kernel_[j];
        w.assign(I, 0.0);
        for (int d = 0; d < I; ++d) {
            double acc = 1.0;
            for (int m = 1; m <= cutoff_[j]; ++m) acc += 2.0 * std::cos(m * d * dphi_);
            w[d] = acc / I;
        }
    }
}

void SphereGrid::point(int i, int j, double z[3]) const {
    z[0] = sin_[j] * std::cos(phi_[i]);
    z[1] = sin_[j] * std::sin(phi_[i]);
    z[2] = cos_[j];
}

void SphereGrid::ghost(int i, int j, int& gi, int& gj) const {
    if (j < 0) {
        i += I_ / 2;
        j = -j - 1;
    } else if (j >= J_) {
        i += I_ / 2;
        j = 2 * J_ - 1 - j;
    }
    gi = ((i % I_) + I_) % I_;
    gj = j;
}

SphereGrid build_grid(int I, int J) { return SphereGrid(I, J); }

ScalarField sample(const SphereGrid& g, const std::function<double(double, double, double)>& fn) {
    ScalarField out(g);
    double z[3];
    for (int i = 0; i < g.I(); ++i)
        for (int j = 0; j < g.J(); ++j) {
            g.point(i, j, z);
            out(i, j) = fn(z[0], z[1], z[2]);
        }
    return out;
}

Derivatives covariant_hessian(const SphereGrid& g, const ScalarField& s) {
    Derivatives out;
    covariant_hessian(g, s, out);
    return out;
}

void covariant_hessian(const SphereGrid& g, const ScalarField& s, Derivatives& out) {
    if (!s.matches(g)) throw ConfigError("field does not match the grid");
    const int I = g.I(), J = g.J(), W = J + 4;
    // Two ghost rows beyond each pole.
    std::vector<double> pad(static_cast<std::size_t>(I) * W);
    for (int i = 0; i < I; ++i)
        for (int jj = 0; jj < W; ++jj) {
            int gi, gj;
            g.ghost(i, jj - 2, gi, gj);
            pad[static_cast<std::size_t>(i) * W + jj] = s(gi, gj);
        }
    out.grad.resize(g.size());
    out.hess.resize(g.size());
    if (!out.gradnorm2.matches(g)) out.gradnorm2 = ScalarField(g);

    const double dt = g.dtheta(), dp = g.dphi();
    const double c1t = 1.0 / (12.0 * dt), c1p = 1.0 / (12.0 * dp);
    const double c2t = 1.0 / (dt * dt), c2p = 1.0 / (12.0 * dp * dp);
    const double cx = 1.0 / (144.0 * dt * dp);
    static constexpr double d1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};

    parallel_for(0, I, [&](int i) {
        const double* col[5];
        for (int a = -2; a <= 2; ++a) col[a + 2] = &pad[static_cast<std::size_t>((i + a + I) % I) * W];
        for (int j = 0; j < J; ++j) {
            const int c = j + 2;
            const double* m = col[2];
            const double f0 = m[c];
            const double st = (m[c - 2] - 8.0 * m[c - 1] + 8.0 * m[c + 1] - m[c + 2]) * c1t;
            const double stt = (m[c - 1] - 2.0 * f0 + m[c + 1]) * c2t;
            const double sp = (col[0][c] - 8.0 * col[1][c] + 8.0 * col[3][c] - col[4][c]) * c1p;
            const double spp = (-col[0][c] + 16.0 * col[1][c] - 30.0 * f0 + 16.0 * col[3][c] - col[4][c]) * c2p;
            double stp = 0.0;
            for (int a = 0; a < 5; ++a) {
                if (a == 2) continue;
                const double* q = col[a];
                stp += d1[a] * (q[c - 2] - 8.0 * q[c - 1] + 8.0 * q[c + 1] - q[c + 2]);
            }
            stp *= cx;
            const double sn = g.sin_theta(j), cot = g.cos_theta(j) / sn;
            const int k = g.index(i, j);
            out.grad[k] = Vec2{st, sp / sn};
            out.hess[k] = Sym2{stt, (stp - cot * sp) / sn, spp / (sn * sn) + cot * st};
            out.gradnorm2[k] = st * st + sp * sp / (sn * sn);
        }
    });
}

std::vector<Sym2> radii_matrix(const SphereGrid& g, const ScalarField& s) {
    Derivatives d = covariant_hessian(g, s);
    for (int k = 0; k < g.size(); ++k) {
        d.hess[k].xx += s[k];
        d.hess[k].yy += s[k];
    }
    return std::move(d.hess);
}

Vec2 eig2(const Sym2& m) {
    const double mean = 0.5 * (m.xx + m.yy);
    const double r = std::hypot(0.5 * (m.xx - m.yy), m.xy);
    return Vec2{mean - r, mean + r};
}

std::vector<Vec2> principal_radii(const std::vector<Sym2>& tau) {
    std::vector<Vec2> out(tau.size());
    std::transform(tau.begin(), tau.end(), out.begin(), eig2);
    return out;
}

double reduce(const SphereGrid& g, const ScalarField& field, Reduction kind) {
    if (!field.matches(g)) throw ConfigError("field does not match the grid");
    switch (kind) {
        case Reduction::min: return *std::min_element(field.values().begin(), field.values().end());
        case Reduction::max: return *std::max_element(field.values().begin(), field.values().end());
        case Reduction::mean: {
            double acc = 0.0;
            for (int j = 0; j < g.J(); ++j) {
                double row = 0.0;
                for (int i = 0; i < g.I(); ++i) row += field(i, j);
                acc += g.area_weight(j) * row;
            }
            return acc;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

void polar_filter(const SphereGrid& g, ScalarField& field) {
    const int I = g.I();
    std::vector<double> row(I);
    for (int j = 0; j < g.J(); ++j) {
        const auto& w = g.filter_kernel(j);
        if (w.empty()) continue;
        for (int i = 0; i < I; ++i) row[i] = field(i, j);
        for (int i = 0; i < I; ++i) {
            double acc = 0.0;
            for (int d = 0; d < I; ++d) {
                int src = i - d;
                if (src < 0) src += I;
                acc += w[d] * row[src];
            }
            field(i, j) = acc;
        }
    }
}

ScalarField shift_longitude(const ScalarField& in, int shift) {
    ScalarField out(in.I(), in.J());
    const int I = in.I();
    for (int i = 0; i < I; ++i) {
        const int src = (((i - shift) % I) + I) % I;
        for (int j = 0; j < in.J(); ++j) out(i, j) = in(src, j);
    }
    return out;
}

void write_csv(const SphereGrid& g, const ScalarField& field, const std::string& path) {
    if (!field.matches(g)) throw ConfigError("field does not match the grid");
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("cannot open " + path + " for writing");
    std::fprintf(fp, "i,j,theta,phi,value\n");
    for (int i = 0; i < g.I(); ++i)
        for (int j = 0; j < g.J(); ++j)
            std::fprintf(fp, "%d,%d,%.17g,%.17g,%.17g\n", i, j, g.theta(j), g.phi(i), field(i, j));
    std::fclose(fp);
}

namespace {

constexpr char kMagic[8] = {'I', 'C', 'F', 'F', 'L', 'D', '0', '1'};

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

}  // namespace

void write_binary(const ScalarField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out.write(kMagic, 8);
    const std::uint32_t I = to_little(static_cast<std::uint32_t>(field.I()));
    const std::uint32_t J = to_little(static_cast<std::uint32_t>(field.J()));
    out.write(reinterpret_cast<const char*>(&I), 4);
    out.write(reinterpret_cast<const char*>(&J), 4);
    for (double v : field.values()) {
        const double le = to_little(v);
        out.write(reinterpret_cast<const char*>(&le), 8);
    }
    if (!out) throw ConfigError("write failed: " + path);
}

ScalarField read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    char magic[8];
    std::uint32_t I = 0, J = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&I), 4);
    in.read(reinterpret_cast<char*>(&J), 4);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw ConfigError(path + " is not a field file");
    I = to_little(I);
    J = to_little(J);
    ScalarField field(static_cast<int>(I), static_cast<int>(J));
    for (int k = 0; k < field.size(); ++k) {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        field[k] = to_little(v);
    }
    if (!in) throw ConfigError(path + " is truncated");
    return field;
}

}  // namespace icf::sphgrid
