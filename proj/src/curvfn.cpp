#include "icf/curvfn.hpp"

#include "icf/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace icf::curvfn {

namespace {

// Fixed inline storage with a heap fallback; keeps the evaluation kernel
// allocation-free for the small dimensions used by the flow solver.
template <std::size_t N>
class Buffer {
public:
    explicit Buffer(std::size_t size) {
        if (size > N) {
            heap_.assign(size, 0.0);
            data_ = heap_.data();
        } else {
            data_ = inline_.data();
            std::fill_n(data_, size, 0.0);
        }
    }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    double* data() { return data_; }
    double& operator[](std::size_t i) { return data_[i]; }

private:
    std::array<double, N> inline_{};
    std::vector<double> heap_;
    double* data_ = nullptr;
};

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

// Elementary symmetric polynomials e[0..k] of p with up to two indices removed.
void esf(const double* p, int n, int skip1, int skip2, int k, double* e) {
    e[0] = 1.0;
    for (int j = 1; j <= k; ++j) e[j] = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i == skip1 || i == skip2) continue;
        for (int j = k; j >= 1; --j) e[j] += p[i] * e[j - 1];
    }
}

// ---- spec text -------------------------------------------------------------

class SpecParser {
public:
    explicit SpecParser(std::string_view text) : text_(text) {}

    FunctionSpec parse_all() {
        FunctionSpec spec = parse();
        if (pos_ != text_.size()) fail("trailing characters");
        return spec;
    }

private:
    FunctionSpec parse() {
        if (eat("power-mean:")) return FunctionSpec{PowerMean{number()}};
        if (eat("elem-sym:")) {
            const double k = number();
            if (k != std::floor(k)) fail("elem-sym order must be an integer");
            return FunctionSpec{ElemSym{static_cast<int>(k)}};
        }
        if (eat("interp:")) {
            auto left = std::make_shared<const FunctionSpec>(parse());
            expect(',');
            auto right = std::make_shared<const FunctionSpec>(parse());
            expect(',');
            const double sigma = number();
            return FunctionSpec{Interpolate{std::move(left), std::move(right), sigma}};
        }
        if (eat("dual:")) return FunctionSpec{Dual{std::make_shared<const FunctionSpec>(parse())}};
        fail("unknown function kind");
    }

    bool eat(std::string_view token) {
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    double number() {
        std::size_t end = pos_;
        while (end < text_.size() && std::string_view("0123456789+-.eE").find(text_[end]) != std::string_view::npos) ++end;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + end, v);
        if (ec != std::errc() || ptr != text_.data() + end || end == pos_) fail("bad number");
        pos_ = end;
        return v;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("cannot parse function spec '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " + why);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace

FunctionSpec parse_spec(std::string_view text) { return SpecParser(text).parse_all(); }

std::string to_string(const FunctionSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PowerMean>) {
                return "power-mean:" + format_number(s.r);
            } else if constexpr (std::is_same_v<T, ElemSym>) {
                return "elem-sym:" + std::to_string(s.k);
            } else if constexpr (std::is_same_v<T, Interpolate>) {
                return "interp:" + to_string(*s.left) + "," + to_string(*s.right) + "," + format_number(s.sigma);
            } else {
                return "dual:" + to_string(*s.inner);
            }
        },
        spec.node);
}

// ---- evaluation tree -------------------------------------------------------

struct CurvatureFunction::Node {
    enum class Kind { power_mean, elem_sym, interpolate, dual };
    Kind kind{};
    int n = 0;
    double r = 1.0;
    int k = 1;
    double binom = 1.0;
    double sigma = 0.5;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
    double unit = 0.0;
    Flags flags;

    double eval(const double* p, double* grad, double* hess) const {
        switch (kind) {
            case Kind::power_mean: return eval_power_mean(p, grad, hess);
            case Kind::elem_sym: return eval_elem_sym(p, grad, hess);
            case Kind::interpolate: return eval_interpolate(p, grad, hess);
            case Kind::dual: return eval_dual(p, grad, hess);
        }
        return 0.0;
    }

    double eval_power_mean(const double* p, double* grad, double* hess) const {
        if (r == 1.0) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += p[i];
            if (grad) std::fill_n(grad, n, 1.0);
            if (hess) std::fill_n(hess, n * n, 0.0);
            return sum;
        }
        // Scale by the extreme component so that every (p_i/m)^r <= 1.
        double m = p[0];
        for (int i = 1; i < n; ++i) m = r > 0 ? std::max(m, p[i]) : std::min(m, p[i]);
        Buffer<16> t(n);
        double S = 0.0;
        for (int i = 0; i < n; ++i) {
            t[i] = std::pow(p[i] / m, r);
            S += t[i];
        }
        const double f = m * std::pow(static_cast<double>(n), 1.0 - 1.0 / r) * std::pow(S, 1.0 / r);
        if (grad || hess) {
            Buffer<16> a_(n);
            for (int i = 0; i < n; ++i) a_[i] = t[i] / (p[i] * S);
            if (grad)
                for (int i = 0; i < n; ++i) grad[i] = f * a_[i];
            if (hess) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double diag = i == j ? t[i] / (p[i] * p[i] * S) : 0.0;
                        hess[i * n + j] = (r - 1.0) * f * (diag - a_[i] * a_[j]);
                    }
            }
        }
        return f;
    }

    double eval_elem_sym(const double* p, double* grad, double* hess) const {
        double m = p[0];
        for (int i = 1; i < n; ++i) m = std::max(m, p[i]);
        Buffer<16> q(n);
        for (int i = 0; i < n; ++i) q[i] = p[i] / m;
        Buffer<16> e(k + 1);
        esf(q.data(), n, -1, -1, k, e.data());
        const double sk = e[k];
        const double fq = n * std::pow(sk / binom, 1.0 / k);
        if (grad || hess) {
            Buffer<16> g(n);
            for (int i = 0; i < n; ++i) {
                esf(q.data(), n, i, -1, k - 1, e.data());
                g[i] = e[k - 1];
            }
            if (grad)
                for (int i = 0; i < n; ++i) grad[i] = fq * g[i] / (k * sk);
            if (hess) {
                const double c1 = fq / (k * sk);
                const double c2 = (1.0 / k - 1.0) * fq / (k * sk * sk);
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        double second = 0.0;
                        if (i != j && k >= 2) {
                            esf(q.data(), n, i, j, k - 2, e.data());
                            second = e[k - 2];
                        }
                        hess[i * n + j] = (c1 * second + c2 * g[i] * g[j]) / m;
                    }
                }
            }
        }
        return m * fq;
    }

    double eval_interpolate(const double* p, double* grad, double* hess) const {
        const bool deriv = grad || hess;
        Buffer<16> ga(deriv ? n : 0), gb(deriv ? n : 0);
        Buffer<64> Ha(hess ? n * n : 0), Hb(hess ? n * n : 0);
        const double va = a->eval(p, deriv ? ga.data() : nullptr, hess ? Ha.data() : nullptr);
        const double vb = b->eval(p, deriv ? gb.data() : nullptr, hess ? Hb.data() : nullptr);
        const double F = n * std::exp(sigma * std::log(va / a->unit) + (1.0 - sigma) * std::log(vb / b->unit));
        if (deriv) {
            Buffer<16> L(n);
            for (int i = 0; i < n; ++i) L[i] = sigma * ga[i] / va + (1.0 - sigma) * gb[i] / vb;
            if (grad)
                for (int i = 0; i < n; ++i) grad[i] = F * L[i];
            if (hess) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double ta = Ha[i * n + j] / va - ga[i] * ga[j] / (va * va);
                        const double tb = Hb[i * n + j] / vb - gb[i] * gb[j] / (vb * vb);
                        hess[i * n + j] = F * (L[i] * L[j] + sigma * ta + (1.0 - sigma) * tb);
                    }
            }
        }
        return F;
    }

    double eval_dual(const double* p, double* grad, double* hess) const {
        const bool deriv = grad || hess;
        Buffer<16> y(n), g(deriv ? n : 0);
        Buffer<64> H(hess ? n * n : 0);
        for (int i = 0; i < n; ++i) y[i] = 1.0 / p[i];
        const double v = a->eval(y.data(), deriv ? g.data() : nullptr, hess ? H.data() : nullptr);
        if (grad)
            for (int i = 0; i < n; ++i) grad[i] = g[i] * y[i] * y[i] / (v * v);
        if (hess) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double yy = y[i] * y[i] * y[j] * y[j];
                    double h = 2.0 * g[i] * g[j] * yy / (v * v * v) - H[i * n + j] * yy / (v * v);
                    if (i == j) h -= 2.0 * g[i] * y[i] * y[i] * y[i] / (v * v);
                    hess[i * n + j] = h;
                }
        }
        return 1.0 / v;
    }
};

namespace {

using Node = CurvatureFunction::Node;

std::shared_ptr<const Node> build_node(const FunctionSpec& spec, int n) {
    auto node = std::make_shared<Node>();
    node->n = n;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PowerMean>) {
                if (!(std::isfinite(s.r)) || s.r == 0.0) throw ConfigError("power-mean exponent must be finite and nonzero");
                node->kind = Node::Kind::power_mean;
                node->r = s.r;
                node->unit = n;
                node->flags = Flags{s.r >= -1.0, s.r <= 1.0, s.r >= 1.0};
            } else if constexpr (std::is_same_v<T, ElemSym>) {
                if (s.k < 1 || s.k > n) throw ConfigError("elem-sym order must lie in 1.." + std::to_string(n));
                node->kind = Node::Kind::elem_sym;
                node->k = s.k;
                node->binom = binomial(n, s.k);
                node->unit = n;
                node->flags = Flags{true, true, s.k == 1};
            } else if constexpr (std::is_same_v<T, Interpolate>) {
                if (!(s.sigma > 0.0 && s.sigma < 1.0)) throw ConfigError("interp weight must lie in (0, 1)");
                node->kind = Node::Kind::interpolate;
                node->a = build_node(*s.left, n);
                node->b = build_node(*s.right, n);
                node->sigma = s.sigma;
                node->unit = n;
                node->flags = Flags{node->a->flags.inverse_concave && node->b->flags.inverse_concave,
                                    node->a->flags.concave && node->b->flags.concave, false};
            } else {
                node->kind = Node::Kind::dual;
                node->a = build_node(*s.inner, n);
                node->unit = 1.0 / node->a->unit;
                node->flags = Flags{node->a->flags.concave, node->a->flags.inverse_concave, false};
            }
        },
        spec.node);
    return node;
}

void require_positive(std::span<const double> p, int n) {
    if (static_cast<int>(p.size()) != n)
        throw DomainError("point has dimension " + std::to_string(p.size()) + ", expected " + std::to_string(n));
    for (double v : p)
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("point is not in the positive cone");
}

}  // namespace

CurvatureFunction::CurvatureFunction(FunctionSpec spec, int n) : spec_(std::move(spec)), n_(n) {
    if (n < 2) throw ConfigError("dimension must be at least 2");
    root_ = build_node(spec_, n);
    flags_ = root_->flags;
    unit_value_ = root_->unit;
}

double CurvatureFunction::eval_raw(const double* p, double* grad, double* hess) const { return root_->eval(p, grad, hess); }

double CurvatureFunction::value(std::span<const double> p) const {
    require_positive(p, n_);
    return root_->eval(p.data(), nullptr, nullptr);
}

DerivativeBundle CurvatureFunction::evaluate(std::span<const double> p) const {
    require_positive(p, n_);
    DerivativeBundle out;
    out.grad.resize(n_);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> h(n_, n_);
    out.value = root_->eval(p.data(), out.grad.data(), h.data());
    out.hess = 0.5 * (h + h.transpose());
    return out;
}

double CurvatureFunction::dual_value(std::span<const double> x) const {
    require_positive(x, n_);
    Buffer<16> y(n_);
    for (int i = 0; i < n_; ++i) y[i] = 1.0 / x[i];
    return 1.0 / root_->eval(y.data(), nullptr, nullptr);
}

CurvatureFunction construct(const FunctionSpec& spec, int n) { return CurvatureFunction(spec, n); }

CurvatureFunction construct(std::string_view spec_text, int n) { return CurvatureFunction(parse_spec(spec_text), n); }

CurvatureFunction dual(const CurvatureFunction& f) {
    return CurvatureFunction(FunctionSpec{Dual{std::make_shared<const FunctionSpec>(f.spec())}}, f.dim());
}

double ddF_quadratic_form(const CurvatureFunction& f, std::span<const double> p, const Eigen::MatrixXd& B) {
    const int n = f.dim();
    if (B.rows() != n || B.cols() != n) throw DomainError("direction matrix has the wrong size");
    const DerivativeBundle d = f.evaluate(p);
    double q = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) q += d.hess(i, k) * B(i, i) * B(k, k);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) {
            const double gap = p[i] - p[k];
            double divided;
            if (std::abs(gap) < kRepeatedEigenvalueTol * (p[i] + p[k]))
                divided = 0.5 * (d.hess(i, i) + d.hess(k, k)) - d.hess(i, k);
            else
                divided = (d.grad(i) - d.grad(k)) / gap;
            const double b = 0.5 * (B(i, k) + B(k, i));
            q += 2.0 * divided * b * b;
        }
    }
    return q;
}

// ---- property verification ---------------------------------------------------

bool PropertyReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check& PropertyReport::get(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no check named " + std::string(name));
}

namespace {

double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(m.rows() - 1);
}

struct Tracker {
    double worst;
    bool track_min;
    void add(double v) { worst = track_min ? std::min(worst, v) : std::max(worst, v); }
};

}  // namespace

PropertyReport verify_properties(const CurvatureFunction& f, int samples, std::uint64_t seed) {
    if (samples < 1) throw ConfigError("need at least one sample");
    const int n = f.dim();
    const CurvatureFunction twice = dual(dual(f));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_comp(std::log(1e-3), std::log(1e3));
    std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));

    const double inf = std::numeric_limits<double>::infinity();
    Tracker homog{0, false}, symm{0, false}, invol{0, false}, euler{0, false};
    Tracker mono{inf, true}, m22{inf, true}, m23{inf, true}, m24{inf, true}, m25{inf, true};
    Tracker concave{inf, true}, convex_hess{inf, true}, convex_lower{inf, true}, convex_dual{inf, true};
    std::vector<double> worst_point;

    std::vector<double> p(n), scaled(n), perm(n);
    std::vector<int> order(n);
    for (int s = 0; s < samples; ++s) {
        for (auto& v : p) v = std::exp(log_comp(rng));
        const DerivativeBundle d = f.evaluate(p);
        const double fv = d.value;

        const double k = std::exp(log_scale(rng));
        for (int i = 0; i < n; ++i) scaled[i] = k * p[i];
        homog.add(std::abs(f.value(scaled) - k * fv) / std::abs(k * fv));

        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int i = 0; i < n; ++i) perm[i] = p[order[i]];
        symm.add(std::abs(f.value(perm) - fv) / std::abs(fv));

        invol.add(std::abs(twice.value(p) - fv) / std::abs(fv));

        double euler_sum = 0.0, second_moment = 0.0;
        for (int i = 0; i < n; ++i) {
            mono.add(d.grad(i) * p[i] / fv);
            euler_sum += d.grad(i) * p[i];
            second_moment += d.grad(i) * p[i] * p[i];
        }
        euler.add(std::abs(euler_sum - fv) / std::abs(fv));

        Eigen::MatrixXd M = d.hess;
        for (int i = 0; i < n; ++i) M(i, i) += 2.0 * d.grad(i) / p[i];
        const double scale_m = M.norm();
        const double e22 = min_eigenvalue(M) / scale_m;
        if (e22 < m22.worst) worst_point = p;
        m22.add(e22);

        const Eigen::MatrixXd Q = M - (2.0 / fv) * d.grad * d.grad.transpose();
        m23.add(min_eigenvalue(Q) / (scale_m + 2.0 * d.grad.squaredNorm() / std::abs(fv)));

        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (a == b) continue;
                const double gap = p[a] - p[b];
                const double divided = std::abs(gap) < kRepeatedEigenvalueTol * (p[a] + p[b])
                                           ? 0.5 * (d.hess(a, a) + d.hess(b, b)) - d.hess(a, b)
                                           : (d.grad(a) - d.grad(b)) / gap;
                const double cross = d.grad(a) / p[b] + d.grad(b) / p[a];
                m24.add((divided + cross) / (std::abs(divided) + std::abs(cross)));
            }

        const double target = fv * fv / n;
        m25.add((second_moment - target) / target);

        const double hess_scale = d.hess.norm() + d.grad.norm() / Eigen::Map<const Eigen::VectorXd>(p.data(), n).norm();
        if (f.flags().concave) concave.add(-max_eigenvalue(d.hess) / hess_scale);
        if (f.flags().convex) {
            convex_hess.add(min_eigenvalue(d.hess) / hess_scale);
            double sum = 0.0, inv_sum = 0.0;
            for (double v : p) {
                sum += v;
                inv_sum += 1.0 / v;
            }
            convex_lower.add((fv - sum) / fv);
            const double harmonic = 1.0 / inv_sum;
            convex_dual.add((harmonic - f.dual_value(p)) / harmonic);
        }
    }

    std::vector<double> ones(n, 1.0);
    const double norm_res = std::abs(f.value(ones) - f.unit_value()) / f.unit_value();

    PropertyReport rep;
    rep.samples = samples;
    rep.worst_point = worst_point;
    auto at_most = [&](std::string name, double v, double thr) { rep.checks.push_back({std::move(name), v, thr, false, v <= thr}); };
    auto at_least = [&](std::string name, double v, double thr) { rep.checks.push_back({std::move(name), v, thr, true, v >= thr}); };
    at_most("homogeneity", homog.worst, 1e-12);
    at_most("symmetry", symm.worst, 1e-12);
    rep.checks.push_back({"monotonicity", mono.worst, 0.0, true, mono.worst > 0.0});
    at_most("normalization", norm_res, 1e-12);
    at_most("involution", invol.worst, 1e-12);
    at_most("euler", euler.worst, 1e-10);
    at_least("inverse_concavity_matrix", m22.worst, -kMarginTol);
    at_least("ineq_quadratic", m23.worst, -kMarginTol);
    at_least("ineq_pairwise", m24.worst, -kMarginTol);
    at_least("ineq_second_moment", m25.worst, -kMarginTol);
    if (f.flags().concave) at_least("concavity", concave.worst, -kMarginTol);
    if (f.flags().convex) {
        at_least("convexity", convex_hess.worst, -kMarginTol);
        at_least("convex_lower_bound", convex_lower.worst, -kMarginTol);
        at_least("convex_dual_upper_bound", convex_dual.worst, -kMarginTol);
    }
    return rep;
}

DecayReport boundary_decay_scan(const CurvatureFunction& f, int path_count, std::uint64_t seed) {
    if (path_count < 1) throw ConfigError("need at least one path");
    const int n = f.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_c(std::log(0.5), std::log(2.0));

    DecayReport rep;
    rep.t_values = {1e-2, 1e-4, 1e-6};
    rep.sup_values.assign(3, 0.0);
    double limit = 0.0;
    bool monotone = true;
    std::vector<double> x(n);
    for (int path = 0; path < path_count; ++path) {
        for (int i = 1; i < n; ++i) x[i] = path == 0 ? 1.0 : std::exp(log_c(rng));
        std::array<double, 3> v{};
        for (int k = 0; k < 3; ++k) {
            x[0] = rep.t_values[k];
            v[k] = f.dual_value(x);
            rep.sup_values[k] = std::max(rep.sup_values[k], v[k]);
        }
        if (v[1] > v[0] || v[2] > v[1]) monotone = false;
        // Aitken's delta-squared limit; exact for a + b t^p on geometric t.
        const double d1 = v[1] - v[0], d2 = v[2] - v[1];
        const double denom = d2 - d1;
        double path_limit = v[2];
        if (std::abs(denom) > 1e-14 * std::abs(v[0])) path_limit = v[2] - d2 * d2 / denom;
        limit = std::max(limit, std::clamp(path_limit, 0.0, v[2]));
    }
    rep.limit_estimate = limit;
    rep.decays = monotone && limit <= 1e-2 * rep.sup_values[0];
    return rep;
}

}  // namespace icf::curvfn
