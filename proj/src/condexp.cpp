#include "condexp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "common.hpp"
#include "parallel.hpp"

namespace hyst {

Feature feature_from_name(const std::string& name) {
    if (name == "t") return Feature::Time;
    if (name == "wt") return Feature::Wt;
    if (name == "iw") return Feature::IntW;
    if (name == "max") return Feature::MaxW;
    if (name == "argmax") return Feature::ArgMaxW;
    throw ConfigError("unknown feature: " + name);
}

std::string feature_name(Feature f) {
    switch (f) {
    case Feature::Time: return "t";
    case Feature::Wt: return "wt";
    case Feature::IntW: return "iw";
    case Feature::MaxW: return "max";
    case Feature::ArgMaxW: return "argmax";
    }
    return "?";
}

void feature_rows(PathRef w, const std::vector<Feature>& feats,
                  std::vector<std::vector<double>>& rows) {
    const int n = w.steps();
    const double dt = w.dt();
    rows.resize(feats.size());
    for (auto& r : rows) r.assign(static_cast<std::size_t>(n) + 1, 0.0);
    double integral = 0.0, running_max = w[0];
    int argmax = 0;
    for (int i = 0; i <= n; ++i) {
        if (w[i] > running_max) {
            running_max = w[i];
            argmax = i;
        }
        for (std::size_t f = 0; f < feats.size(); ++f) {
            double v = 0.0;
            switch (feats[f]) {
            case Feature::Time: v = w.grid->node(i); break;
            case Feature::Wt: v = w[i]; break;
            case Feature::IntW: v = integral; break;
            case Feature::MaxW: v = running_max; break;
            case Feature::ArgMaxW: v = w.grid->node(argmax); break;
            }
            rows[f][static_cast<std::size_t>(i)] = v;
        }
        integral += w[i] * dt;
    }
}

namespace {

// multi-indices with total degree <= degree over nfeat variables
std::vector<std::vector<int>> enumerate_exponents(int nfeat, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(nfeat), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == nfeat) {
            out.push_back(cur);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            cur[static_cast<std::size_t>(pos)] = k;
            rec(pos + 1, left - k);
        }
        cur[static_cast<std::size_t>(pos)] = 0;
    };
    rec(0, degree);
    return out;
}

void monomials(std::span<const double> z, const std::vector<std::vector<int>>& exps,
               std::span<double> out) {
    for (std::size_t p = 0; p < exps.size(); ++p) {
        double v = 1.0;
        for (std::size_t f = 0; f < exps[p].size(); ++f)
            for (int k = 0; k < exps[p][f]; ++k) v *= z[f];
        out[p] = v;
    }
}

} // namespace

double CondExpEstimator::evaluate(int node, PathRef w) const {
    const std::size_t i = static_cast<std::size_t>(node);
    if (diag_[i].degenerate) return coef_[i][0];
    std::vector<std::vector<double>> rows;
    feature_rows(w, features_, rows);
    std::vector<double> z(features_.size());
    for (std::size_t f = 0; f < features_.size(); ++f)
        z[f] = (rows[f][i] - mean_[i][f]) / scale_[i][f];
    std::vector<double> phi(exponents_.size());
    monomials(z, exponents_, phi);
    double acc = 0.0;
    for (std::size_t p = 0; p < phi.size(); ++p) acc += coef_[i][p] * phi[p];
    return acc;
}

void CondExpEstimator::evaluate_row(PathRef w, std::span<double> out) const {
    std::vector<std::vector<double>> rows;
    bool have_rows = false;
    std::vector<double> z(features_.size()), phi(exponents_.size());
    for (int node = 0; node < nodes(); ++node) {
        const std::size_t i = static_cast<std::size_t>(node);
        if (diag_[i].degenerate) {
            out[i] = coef_[i][0];
            continue;
        }
        if (!have_rows) {
            feature_rows(w, features_, rows);
            have_rows = true;
        }
        for (std::size_t f = 0; f < features_.size(); ++f)
            z[f] = (rows[f][i] - mean_[i][f]) / scale_[i][f];
        monomials(z, exponents_, phi);
        double acc = 0.0;
        for (std::size_t p = 0; p < phi.size(); ++p) acc += coef_[i][p] * phi[p];
        out[i] = acc;
    }
}

bool CondExpEstimator::any_ill_conditioned() const {
    for (const auto& d : diag_)
        if (d.ill_conditioned) return true;
    return false;
}

void CondExpEstimator::write_coefficients_csv(const std::string& file) const {
    std::FILE* f = std::fopen(file.c_str(), "w");
    if (!f) throw ConfigError("cannot open " + file + " for writing");
    std::fprintf(f, "node,r2,condition");
    for (std::size_t p = 0; p < exponents_.size(); ++p) std::fprintf(f, ",c%zu", p);
    std::fprintf(f, "\n");
    for (int i = 0; i < nodes(); ++i) {
        const auto& d = diag_[static_cast<std::size_t>(i)];
        std::fprintf(f, "%d,%s,%s", i, fmt_full(d.r2).c_str(), fmt_full(d.condition).c_str());
        for (double c : coef_[static_cast<std::size_t>(i)])
            std::fprintf(f, ",%s", fmt_full(c).c_str());
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

int eval_begin(const BrownianEnsemble& ens, const BasisSpec& spec) {
    return spec.split_fit ? ens.paths() / 2 : 0;
}

CondExpEstimator fit_conditional(
    const BrownianEnsemble& ens,
    const std::function<void(int, PathRef, std::span<double>)>& target_row,
    const BasisSpec& spec) {
    const int nodes = ens.grid().nodes();
    const int nfeat = static_cast<int>(spec.features.size());
    const int fit_first = spec.fit_count > 0 ? spec.fit_begin : 0;
    const int fit_paths =
        spec.fit_count > 0 ? spec.fit_count : (spec.split_fit ? ens.paths() / 2 : ens.paths());
    if (fit_first < 0 || fit_first + fit_paths > ens.paths())
        throw ConfigError("fit range exceeds the ensemble");
    if (fit_paths < 2) throw ConfigError("not enough paths to fit a conditioner");

    CondExpEstimator est;
    est.features_ = spec.features;
    est.exponents_ = enumerate_exponents(nfeat, spec.degree);
    const int P = static_cast<int>(est.exponents_.size());
    if (fit_paths < 10 * P)
        throw ConfigError("conditioner needs at least 10 paths per basis term");

    const std::size_t nn = static_cast<std::size_t>(nodes);
    const std::size_t nf = static_cast<std::size_t>(nfeat);
    const std::size_t np = static_cast<std::size_t>(P);
    const std::size_t tri = np * (np + 1) / 2;

    // pass A: feature and target moments per node
    const std::size_t chunk = 4096;
    const std::size_t nchunks = chunk_count(static_cast<std::size_t>(fit_paths), chunk);
    const std::size_t a_stride = nn * (2 * nf + 2);
    std::vector<double> a_acc(nchunks * a_stride, 0.0);
    parallel_chunks(static_cast<std::size_t>(fit_paths), chunk,
                    [&](std::size_t b, std::size_t e, std::size_t ci) {
                        std::vector<std::vector<double>> rows;
                        std::vector<double> targ(nn);
                        double* acc = a_acc.data() + ci * a_stride;
                        for (std::size_t j = b; j < e; ++j) {
                            PathRef w = ens.path(fit_first + static_cast<int>(j));
                            feature_rows(w, est.features_, rows);
                            target_row(fit_first + static_cast<int>(j), w, targ);
                            for (std::size_t i = 0; i < nn; ++i) {
                                double* node_acc = acc + i * (2 * nf + 2);
                                for (std::size_t f = 0; f < nf; ++f) {
                                    node_acc[2 * f] += rows[f][i];
                                    node_acc[2 * f + 1] += rows[f][i] * rows[f][i];
                                }
                                node_acc[2 * nf] += targ[i];
                                node_acc[2 * nf + 1] += targ[i] * targ[i];
                            }
                        }
                    });
    // reduce in chunk order
    for (std::size_t ci = 1; ci < nchunks; ++ci)
        for (std::size_t k = 0; k < a_stride; ++k) a_acc[k] += a_acc[ci * a_stride + k];

    est.mean_.assign(nn, std::vector<double>(nf, 0.0));
    est.scale_.assign(nn, std::vector<double>(nf, 1.0));
    est.coef_.assign(nn, std::vector<double>(np, 0.0));
    est.diag_.assign(nn, NodeDiagnostics{});
    std::vector<double> target_mean(nn), target_var(nn);
    std::vector<char> needs(nn, 0);
    const double inv_m = 1.0 / static_cast<double>(fit_paths);
    std::size_t active = 0;
    for (std::size_t i = 0; i < nn; ++i) {
        const double* node_acc = a_acc.data() + i * (2 * nf + 2);
        for (std::size_t f = 0; f < nf; ++f) {
            const double m = node_acc[2 * f] * inv_m;
            const double var = std::max(0.0, node_acc[2 * f + 1] * inv_m - m * m);
            est.mean_[i][f] = m;
            est.scale_[i][f] = var > 1e-24 ? std::sqrt(var) : 1.0;
        }
        target_mean[i] = node_acc[2 * nf] * inv_m;
        target_var[i] = std::max(0.0, node_acc[2 * nf + 1] * inv_m - target_mean[i] * target_mean[i]);
        if (target_var[i] <= 1e-28 * (1.0 + target_mean[i] * target_mean[i])) {
            est.diag_[i].degenerate = true;
            est.coef_[i][0] = target_mean[i]; // constant term (exponent 0 is first)
        } else {
            needs[i] = 1;
            ++active;
        }
    }
    if (active == 0) return est;

    // pass B: per-node Gram of standardized monomials and cross moments
    const std::size_t b_stride = nn * (tri + np);
    std::vector<double> b_acc(nchunks * b_stride, 0.0);
    parallel_chunks(static_cast<std::size_t>(fit_paths), chunk,
                    [&](std::size_t b, std::size_t e, std::size_t ci) {
                        std::vector<std::vector<double>> rows;
                        std::vector<double> targ(nn), z(nf), phi(np);
                        double* acc = b_acc.data() + ci * b_stride;
                        for (std::size_t j = b; j < e; ++j) {
                            PathRef w = ens.path(fit_first + static_cast<int>(j));
                            feature_rows(w, est.features_, rows);
                            target_row(fit_first + static_cast<int>(j), w, targ);
                            for (std::size_t i = 0; i < nn; ++i) {
                                if (!needs[i]) continue;
                                for (std::size_t f = 0; f < nf; ++f)
                                    z[f] = (rows[f][i] - est.mean_[i][f]) / est.scale_[i][f];
                                monomials(z, est.exponents_, phi);
                                double* node_acc = acc + i * (tri + np);
                                std::size_t k = 0;
                                for (std::size_t p = 0; p < np; ++p)
                                    for (std::size_t q = p; q < np; ++q)
                                        node_acc[k++] += phi[p] * phi[q];
                                for (std::size_t p = 0; p < np; ++p)
                                    node_acc[tri + p] += phi[p] * targ[i];
                            }
                        }
                    });
    for (std::size_t ci = 1; ci < nchunks; ++ci)
        for (std::size_t k = 0; k < b_stride; ++k) b_acc[k] += b_acc[ci * b_stride + k];

    for (std::size_t i = 0; i < nn; ++i) {
        NodeDiagnostics& d = est.diag_[i];
        if (!needs[i]) continue;
        const double* node_acc = b_acc.data() + i * (tri + np);
        Eigen::MatrixXd G(P, P);
        std::size_t k = 0;
        for (int p = 0; p < P; ++p)
            for (int q = p; q < P; ++q) {
                G(p, q) = node_acc[k];
                G(q, p) = node_acc[k];
                ++k;
            }
        Eigen::VectorXd rhs(P);
        for (int p = 0; p < P; ++p) rhs(p) = node_acc[tri + static_cast<std::size_t>(p)];

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
        const auto& ev = eig.eigenvalues();
        const double lmax = ev(P - 1);
        double lmin_pos = lmax;
        const double cutoff = std::max(lmax, 0.0) * 1e-13;
        Eigen::VectorXd y = eig.eigenvectors().transpose() * rhs;
        for (int p = 0; p < P; ++p) {
            if (ev(p) > cutoff) {
                y(p) /= ev(p);
                lmin_pos = std::min(lmin_pos, ev(p));
            } else {
                y(p) = 0.0;
            }
        }
        Eigen::VectorXd c = eig.eigenvectors() * y;
        for (int p = 0; p < P; ++p) est.coef_[i][static_cast<std::size_t>(p)] = c(p);

        d.condition = lmin_pos > 0.0 ? lmax / lmin_pos : std::numeric_limits<double>::infinity();
        d.ill_conditioned = d.condition > 1e10;
        const double yty = target_var[i] + target_mean[i] * target_mean[i];
        const double ssr = std::max(
            0.0, yty * static_cast<double>(fit_paths) - 2.0 * c.dot(rhs) + c.dot(G * c));
        const double sst = target_var[i] * static_cast<double>(fit_paths);
        d.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    }
    return est;
}

CondExpEstimator fit_tail_recursive(
    const BrownianEnsemble& ens,
    const std::function<void(int, PathRef, std::span<double>)>& q_row,
    std::span<const double> gamma, const BasisSpec& spec) {
    const int nodes = ens.grid().nodes();
    const int n = ens.grid().steps();
    const double dt = ens.grid().dt();
    const int nfeat = static_cast<int>(spec.features.size());
    const int fit_first = spec.fit_count > 0 ? spec.fit_begin : 0;
    const int fit_paths =
        spec.fit_count > 0 ? spec.fit_count : (spec.split_fit ? ens.paths() / 2 : ens.paths());
    if (fit_first < 0 || fit_first + fit_paths > ens.paths())
        throw ConfigError("fit range exceeds the ensemble");

    CondExpEstimator est;
    est.features_ = spec.features;
    est.exponents_ = enumerate_exponents(nfeat, spec.degree);
    const int P = static_cast<int>(est.exponents_.size());
    if (fit_paths < 10 * P)
        throw ConfigError("conditioner needs at least 10 paths per basis term");

    const std::size_t nn = static_cast<std::size_t>(nodes);
    const std::size_t nf = static_cast<std::size_t>(nfeat);
    const std::size_t np = static_cast<std::size_t>(P);
    const std::size_t mf = static_cast<std::size_t>(fit_paths);

    // single-precision feature and integrand panels over the fit range
    std::vector<std::vector<float>> feat(nf);
    for (auto& v : feat) v.resize(mf * nn);
    std::vector<float> qmat(mf * nn);
    parallel_chunks(mf, 2048, [&](std::size_t b, std::size_t e, std::size_t) {
        std::vector<std::vector<double>> rows;
        std::vector<double> q(nn);
        for (std::size_t j = b; j < e; ++j) {
            PathRef w = ens.path(fit_first + static_cast<int>(j));
            feature_rows(w, est.features_, rows);
            q_row(fit_first + static_cast<int>(j), w, q);
            for (std::size_t i = 0; i < nn; ++i) {
                for (std::size_t f = 0; f < nf; ++f)
                    feat[f][j * nn + i] = static_cast<float>(rows[f][i]);
                qmat[j * nn + i] = static_cast<float>(q[i]);
            }
        }
    });

    est.mean_.assign(nn, std::vector<double>(nf, 0.0));
    est.scale_.assign(nn, std::vector<double>(nf, 1.0));
    est.coef_.assign(nn, std::vector<double>(np, 0.0));
    est.diag_.assign(nn, NodeDiagnostics{});

    std::vector<double> fprev(mf, 0.0); // F at node n is the empty tail
    est.diag_[static_cast<std::size_t>(n)].degenerate = true;

    std::vector<double> z(nf), phi(np), gram(np * (np + 1) / 2), rhs(np);
    const std::size_t tri = gram.size();
    for (int t = n - 1; t >= 0; --t) {
        const std::size_t it = static_cast<std::size_t>(t);
        // feature moments at this node
        for (std::size_t f = 0; f < nf; ++f) {
            double s = 0, s2 = 0;
            for (std::size_t j = 0; j < mf; ++j) {
                const double x = feat[f][j * nn + it];
                s += x;
                s2 += x * x;
            }
            const double m = s / static_cast<double>(mf);
            const double var = std::max(0.0, s2 / static_cast<double>(mf) - m * m);
            est.mean_[it][f] = m;
            est.scale_[it][f] = var > 1e-24 ? std::sqrt(var) : 1.0;
        }
        double ts = 0, ts2 = 0;
        std::fill(gram.begin(), gram.end(), 0.0);
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (std::size_t j = 0; j < mf; ++j) {
            const double y = qmat[j * nn + it] * dt + gamma[it] * fprev[j];
            ts += y;
            ts2 += y * y;
            for (std::size_t f = 0; f < nf; ++f)
                z[f] = (feat[f][j * nn + it] - est.mean_[it][f]) / est.scale_[it][f];
            monomials(z, est.exponents_, phi);
            std::size_t k = 0;
            for (std::size_t p = 0; p < np; ++p)
                for (std::size_t q = p; q < np; ++q) gram[k++] += phi[p] * phi[q];
            for (std::size_t p = 0; p < np; ++p) rhs[p] += phi[p] * y;
        }
        const double tmean = ts / static_cast<double>(mf);
        const double tvar = std::max(0.0, ts2 / static_cast<double>(mf) - tmean * tmean);
        NodeDiagnostics& d = est.diag_[it];
        if (tvar <= 1e-28 * (1.0 + tmean * tmean)) {
            d.degenerate = true;
            est.coef_[it][0] = tmean;
            for (std::size_t j = 0; j < mf; ++j)
                fprev[j] = qmat[j * nn + it] * dt + gamma[it] * fprev[j];
            continue;
        }
        Eigen::MatrixXd G(P, P);
        std::size_t k = 0;
        for (int p = 0; p < P; ++p)
            for (int q = p; q < P; ++q) {
                G(p, q) = gram[k];
                G(q, p) = gram[k];
                ++k;
            }
        Eigen::VectorXd b(P);
        for (int p = 0; p < P; ++p) b(p) = rhs[static_cast<std::size_t>(p)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
        const auto& ev = eig.eigenvalues();
        const double lmax = ev(P - 1);
        const double cutoff = std::max(lmax, 0.0) * 1e-13;
        double lmin_pos = lmax;
        Eigen::VectorXd y2 = eig.eigenvectors().transpose() * b;
        for (int p = 0; p < P; ++p) {
            if (ev(p) > cutoff) {
                y2(p) /= ev(p);
                lmin_pos = std::min(lmin_pos, ev(p));
            } else {
                y2(p) = 0.0;
            }
        }
        Eigen::VectorXd c = eig.eigenvectors() * y2;
        for (int p = 0; p < P; ++p) est.coef_[it][static_cast<std::size_t>(p)] = c(p);
        d.condition = lmin_pos > 0.0 ? lmax / lmin_pos : std::numeric_limits<double>::infinity();
        d.ill_conditioned = d.condition > 1e10;
        const double ssr =
            std::max(0.0, ts2 - 2.0 * c.dot(b) + c.dot(G * c));
        d.r2 = tvar > 0.0 ? 1.0 - ssr / (tvar * static_cast<double>(mf)) : 1.0;

        // substitute the fitted value, not the realized tail
        for (std::size_t j = 0; j < mf; ++j) {
            for (std::size_t f = 0; f < nf; ++f)
                z[f] = (feat[f][j * nn + it] - est.mean_[it][f]) / est.scale_[it][f];
            monomials(z, est.exponents_, phi);
            double acc = 0.0;
            for (std::size_t p = 0; p < np; ++p) acc += est.coef_[it][p] * phi[p];
            fprev[j] = acc;
        }
    }
    return est;
}

// --- nested Monte Carlo ---------------------------------------------------------

NestedMcResult nested_mc(const std::function<double(PathRef)>& future_functional,
                         const TimeGrid& grid, std::span<const double> prefix, int i,
                         int inner, std::uint64_t seed) {
    std::vector<double> buf(static_cast<std::size_t>(grid.nodes()));
    double sum = 0.0, sum2 = 0.0;
    for (int m = 0; m < inner; ++m) {
        fill_continuation(buf, prefix, i, grid.dt(), mix64(seed, static_cast<std::uint64_t>(m)));
        const double v = future_functional(PathRef{&grid, buf});
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / inner;
    const double var = std::max(0.0, sum2 / inner - mean * mean);
    return {mean, std::sqrt(var / inner)};
}

// --- closed forms -----------------------------------------------------------------

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 40);
}

} // namespace

double tipping_gap_integral(double z, double t, double horizon, double tol) {
    const double tau = horizon - t;
    if (tau <= 0.0 || z < 0.0) return 0.0;
    auto integrand = [z](double u) {
        if (u <= 0.0) return 0.0;
        return (2.0 * norm_cdf(z / u) - 1.0) * 2.0 * u;
    };
    return integrate(integrand, 0.0, std::sqrt(tau), tol);
}

double tipping_gap_integral_dz(double z, double t, double horizon, double tol) {
    const double tau = horizon - t;
    if (tau <= 0.0 || z < 0.0) return 0.0;
    auto integrand = [z](double u) {
        if (u <= 0.0) return z == 0.0 ? 4.0 * norm_pdf(0.0) : 0.0;
        return 4.0 * norm_pdf(z / u);
    };
    return integrate(integrand, 0.0, std::sqrt(tau), tol);
}

double tipping_closed_form(int i, PathRef w, const SmoothFn& f, double horizon) {
    double m = w[0];
    int arg = 0;
    for (int j = 1; j <= i; ++j)
        if (w[j] > m) {
            m = w[j];
            arg = j;
        }
    const double t = w.grid->node(i);
    const double weight = f.f(t - w.grid->node(arg));
    if (weight == 0.0) return 0.0;
    return weight * tipping_gap_integral(m - w[i], t, horizon);
}

NestedMcResult tipping_nested_mc(const SmoothFn& f, const TimeGrid& grid,
                                 std::span<const double> prefix, int i, int inner,
                                 std::uint64_t seed) {
    const int n = grid.steps();
    const double dt = grid.dt();
    double m = prefix[0];
    int arg = 0;
    for (int j = 1; j <= i; ++j)
        if (prefix[static_cast<std::size_t>(j)] > m) {
            m = prefix[static_cast<std::size_t>(j)];
            arg = j;
        }
    const double weight = f.f(grid.node(i) - grid.node(arg));
    if (weight == 0.0) return {0.0, 0.0};
    const double z = m - prefix[static_cast<std::size_t>(i)]; // record gap

    // refine the time axis when the survival boundary layer (width ~ z^2) is
    // below the step size, so the trapezoid in s stays second order
    int refine = static_cast<int>(std::ceil(8.0 * dt / (z * z + 0.25 * dt)));
    refine = std::clamp(refine, 1, 32);
    const double h = dt / refine;
    const long total = static_cast<long>(n - i) * refine;

    double sum = 0.0, sum2 = 0.0;
    const double sh = std::sqrt(h);
    for (int rep = 0; rep < inner; ++rep) {
        std::mt19937_64 eng(mix64(seed, static_cast<std::uint64_t>(rep)));
        std::normal_distribution<double> gauss(0.0, sh);
        double x = 0.0, survival = 1.0, integral = 0.5 * survival * h;
        for (long s = 0; s < total; ++s) {
            const double xn = x + gauss(eng);
            double pcross = 1.0;
            if (x < z && xn < z) pcross = std::exp(-2.0 * (z - x) * (z - xn) / h);
            survival *= 1.0 - pcross;
            integral += (s + 1 < total ? survival : 0.5 * survival) * h;
            x = xn;
            if (survival == 0.0) break;
        }
        const double v = weight * integral;
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / inner;
    const double var = std::max(0.0, sum2 / inner - mean * mean);
    return {mean, std::sqrt(var / inner)};
}

ClosedFormEntry closed_form(const std::string& name, const TimeGrid& grid) {
    const double T = grid.horizon();
    if (name == "E[int_t^T w ds]")
        return {name, [T](int i, PathRef w) { return (T - w.grid->node(i)) * w[i]; }};
    if (name == "E[w_T]")
        return {name, [](int i, PathRef w) { return w[i]; }};
    if (name == "E[w_T^2]")
        return {name, [T](int i, PathRef w) { return w[i] * w[i] + (T - w.grid->node(i)); }};
    if (name == "E[int_0^T w ds]")
        return {name, [T](int i, PathRef w) {
                    double acc = 0.0;
                    for (int j = 0; j < i; ++j) acc += w[j];
                    return acc * w.dt() + (T - w.grid->node(i)) * w[i];
                }};
    throw ConfigError("unknown closed form: " + name);
}

} // namespace hyst
