#pragma once

// Symmetric, degree-one homogeneous curvature functions on the positive cone,
// their duals f_*(x) = 1 / f(1/x), and the structural inequalities used by
// the pinching argument for inverse curvature flows.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace icf::curvfn {

struct FunctionSpec;

/// H_r = n^{1 - 1/r} (sum k_i^r)^{1/r}, r != 0.
struct PowerMean {
    double r;
};

/// n E_k^{1/k} with E_k = sigma_k / C(n, k).
struct ElemSym {
    int k;
};

/// G1^sigma G2^{1-sigma}, factors rescaled to take the value n at (1, ..., 1).
struct Interpolate {
    std::shared_ptr<const FunctionSpec> left;
    std::shared_ptr<const FunctionSpec> right;
    double sigma;
};

/// f_*(x) = f(1/x)^{-1}.
struct Dual {
    std::shared_ptr<const FunctionSpec> inner;
};

struct FunctionSpec {
    std::variant<PowerMean, ElemSym, Interpolate, Dual> node;
};

/// Parses `power-mean:<r>`, `elem-sym:<k>`, `interp:<a>,<b>,<sigma>` and `dual:<spec>`.
FunctionSpec parse_spec(std::string_view text);
std::string to_string(const FunctionSpec& spec);

struct Flags {
    bool inverse_concave = false;
    bool concave = false;
    bool convex = false;
};

struct DerivativeBundle {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

class CurvatureFunction {
public:
    /// Validates the parameters against the dimension; throws ConfigError.
    CurvatureFunction(FunctionSpec spec, int n);

    int dim() const { return n_; }
    const FunctionSpec& spec() const { return spec_; }
    const Flags& flags() const { return flags_; }
    std::string to_string() const { return curvfn::to_string(spec_); }

    /// Value at (1, ..., 1): n for every spec except duals, where it inverts.
    double unit_value() const { return unit_value_; }

    /// Throws DomainError when a component is not strictly positive.
    double value(std::span<const double> p) const;
    DerivativeBundle evaluate(std::span<const double> p) const;

    /// f_*(x) = 1 / f(1/x) without constructing the dual.
    double dual_value(std::span<const double> x) const;

    /// Allocation-free kernel for hot loops: `grad` (size n) and `hess`
    /// (row-major n*n) may be null. No domain checks.
    double eval_raw(const double* p, double* grad, double* hess) const;

    struct Node;  // evaluation tree, defined in the source file

private:
    FunctionSpec spec_;
    int n_;
    Flags flags_;
    double unit_value_;
    std::shared_ptr<const Node> root_;
};

CurvatureFunction construct(const FunctionSpec& spec, int n);
CurvatureFunction construct(std::string_view spec_text, int n);

/// Dual function; dual(dual(f)) evaluates identically to f.
CurvatureFunction dual(const CurvatureFunction& f);

/// Relative threshold below which two eigenvalues count as repeated.
inline constexpr double kRepeatedEigenvalueTol = 1e-8;

/// Second derivative of F(A) = f(eig(A)) at A = diag(p) in direction B.
double ddF_quadratic_form(const CurvatureFunction& f, std::span<const double> p, const Eigen::MatrixXd& B);

/// Margin below which a normalized check counts as failed; smaller negatives are roundoff.
inline constexpr double kMarginTol = 1e-10;

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool at_least = true;  // pass iff value >= threshold, else value <= threshold
    bool pass = false;
};

struct PropertyReport {
    int samples = 0;
    std::vector<Check> checks;
    /// Sample with the smallest eigenvalue of the inverse-concavity matrix.
    std::vector<double> worst_point;
    bool pass() const;
    const Check& get(std::string_view name) const;
};

/// Sampling verification of homogeneity, symmetry, monotonicity, normalization,
/// involution, the inverse-concavity matrix and the inequalities it implies.
/// Samples are log-uniform per component in [1e-3, 1e3].
PropertyReport verify_properties(const CurvatureFunction& f, int samples, std::uint64_t seed);

struct DecayReport {
    std::vector<double> t_values;    // 1e-2, 1e-4, 1e-6
    std::vector<double> sup_values;  // sup over rays of f_* at each t
    double limit_estimate = 0.0;     // extrapolated sup of the limit as t -> 0
    bool decays = false;
};

/// Evaluates f_* along rays (t, c_2, ..., c_n) with t -> 0.
DecayReport boundary_decay_scan(const CurvatureFunction& f, int path_count, std::uint64_t seed = 1);

}  // namespace icf::curvfn
