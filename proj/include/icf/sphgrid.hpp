#pragma once

// Latitude-offset longitude/colatitude grid on the round 2-sphere with
// antipodal continuation across the poles.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace icf::sphgrid {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Symmetric 2x2 matrix.
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

class SphereGrid {
public:
    /// I even and >= 8, J >= 4; throws ConfigError otherwise.
    SphereGrid(int I, int J);

    int I() const { return I_; }
    int J() const { return J_; }
    int size() const { return I_ * J_; }
    int index(int i, int j) const { return i * J_ + j; }

    double dtheta() const { return dtheta_; }
    double dphi() const { return dphi_; }
    double theta(int j) const { return theta_[j]; }
    double phi(int i) const { return phi_[i]; }
    double sin_theta(int j) const { return sin_[j]; }
    double cos_theta(int j) const { return cos_[j]; }

    /// Unit vector z(theta_j, phi_i) in R^3.
    void point(int i, int j, double z[3]) const;

    /// Node reached by continuing (i, j) across a pole or around in longitude.
    void ghost(int i, int j, int& gi, int& gj) const;

    /// Highest longitudinal wavenumber kept on row j by the polar filter.
    int zonal_cutoff(int j) const { return cutoff_[j]; }

    /// Spacing used for time-step control: half the colatitude step, the
    /// resolved scale on filtered rows.
    double h_min() const { return 0.5 * dtheta_; }

    /// Area weight of row j, normalized so the weights sum to one over all nodes.
    double area_weight(int j) const { return weight_[j]; }

    /// Convolution kernels of the filtered rows (empty for unfiltered rows).
    const std::vector<double>& filter_kernel(int j) const { return kernel_[j]; }

private:
    int I_, J_;
    double dtheta_, dphi_;
    std::vector<double> theta_, phi_, sin_, cos_, weight_;
    std::vector<int> cutoff_;
    std::vector<std::vector<double>> kernel_;
};

SphereGrid build_grid(int I, int J);

/// Node values, stored with index i * J + j.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int I, int J, double fill = 0.0) : I_(I), J_(J), values_(static_cast<std::size_t>(I) * J, fill) {}
    explicit ScalarField(const SphereGrid& g, double fill = 0.0) : ScalarField(g.I(), g.J(), fill) {}

    int I() const { return I_; }
    int J() const { return J_; }
    int size() const { return static_cast<int>(values_.size()); }
    double& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * J_ + j]; }
    double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * J_ + j]; }
    double& operator[](int k) { return values_[k]; }
    double operator[](int k) const { return values_[k]; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    const std::vector<double>& values() const { return values_; }
    bool matches(const SphereGrid& g) const { return I_ == g.I() && J_ == g.J(); }

private:
    int I_ = 0, J_ = 0;
    std::vector<double> values_;
};

/// Samples fn(z) at every node, z the unit vector in R^3.
ScalarField sample(const SphereGrid& g, const std::function<double(double, double, double)>& fn);

/// First and second derivatives in the orthonormal frame (d_theta, d_phi / sin theta).
struct Derivatives {
    std::vector<Vec2> grad;
    std::vector<Sym2> hess;
    ScalarField gradnorm2;
};

/// Covariant gradient and Hessian of the round metric. Fourth-order stencils
/// for the first derivatives, the longitude second derivative and the mixed
/// term; three-point second difference in colatitude.
Derivatives covariant_hessian(const SphereGrid& g, const ScalarField& s);

/// Same, reusing the storage of `out`.
void covariant_hessian(const SphereGrid& g, const ScalarField& s, Derivatives& out);

/// tau = hess + s Id per node, orthonormal frame.
std::vector<Sym2> radii_matrix(const SphereGrid& g, const ScalarField& s);

/// Ordered eigenvalues (x <= y) of a symmetric 2x2 matrix.
Vec2 eig2(const Sym2& m);

std::vector<Vec2> principal_radii(const std::vector<Sym2>& tau);

enum class Reduction { min, max, mean };

/// Min, max, or sin(theta)-weighted area mean.
double reduce(const SphereGrid& g, const ScalarField& field, Reduction kind);

/// Removes longitudinal wavenumbers above zonal_cutoff(j) on every polar row.
void polar_filter(const SphereGrid& g, ScalarField& field);

/// Field rotated by `shift` longitude steps: out(i, j) = in(i - shift, j).
ScalarField shift_longitude(const ScalarField& in, int shift);

/// CSV with header i,j,theta,phi,value.
void write_csv(const SphereGrid& g, const ScalarField& field, const std::string& path);

/// Binary dump: "ICFFLD01", uint32 I, uint32 J, then I*J little-endian doubles.
void write_binary(const ScalarField& field, const std::string& path);
ScalarField read_binary(const std::string& path);

}  // namespace icf::sphgrid
