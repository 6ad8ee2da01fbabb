#include "contractlab/hjb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

namespace contractlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Control chosen at one node together with its discrete equation
// V_n = mult * (stencil . V + offset) + rhs.
struct Choice {
    Stencil st;
    double mult = 0.0;
    double rhs = 0.0;
    bool pay = false;
    double theta = 0.0, px = 0.0, py = 0.0;
    int kb = 0, kg = 0;
};

double apply(const Stencil& s, const std::vector<double>& V)
{
    double v = s.offset;
    for (int q = 0; q < s.n; ++q) v += s.w[q] * V[s.idx[q]];
    return v;
}

double q_value(const Choice& c, const std::vector<double>& V) { return c.mult * apply(c.st, V) + c.rhs; }

struct PostCandidate {
    int i, k;
    double px, py, v;
};

class Solver {
public:
    Solver(const Model& m, GridValueFunction& g, const GridValueFunction* prev, const HjbOptions& opt)
        : m_(m), g_(g), prev_(prev), opt_(opt)
    {
        j_ = g.j;
        bh_ = m.b_hat(j_);
        lam_max_ = m.lambda_sh(j_);
        tcap_ = 1.0 / (4.0 * lam_max_);
        // Slack for feet just outside a curved boundary: chord error of one step, O(h^2).
        double curv = 0.0;
        for (int i = 2; i + 1 < g.nx; ++i)
            curv = std::max(curv, std::abs(g.U[i + 1] - 2.0 * g.U[i] + g.U[i - 1]) / (g.hx * g.hx));
        const double step = g.hx * (1.0 + g.rho_g / g.rho_b);
        vtol_ = curv * step * step + 1e-12 * std::max(1.0, g.x1);
        // Payment foot per node is geometry only.
        pay_.resize(g.size());
        for (int i = 1; i < g.nx; ++i)
            for (int k = 1; k + 1 < g.ny; ++k) pay_[g.id(i, k)] = make_pay(i, k);
    }

    void run()
    {
        std::vector<Choice> choice(g_.size());
        double diff = kInf;
        int it = 0;
        for (; it < opt_.max_iter; ++it) {
            improve(choice);
            std::vector<double> Vn = evaluate(choice);
            diff = 0.0;
            for (std::size_t n = 0; n < Vn.size(); ++n) diff = std::max(diff, std::abs(Vn[n] - g_.V[n]));
            g_.V = std::move(Vn);
            if (diff < opt_.tol * g_.scale) break;
        }
        g_.iterations = it + 1;
        if (!(diff < opt_.tol * g_.scale))
            throw SolverError("Howard iteration did not converge (last update " + std::to_string(diff) + ")");
        // Final improvement fixes the reported policy and the complementarity residual.
        improve(choice);
        g_.residual = 0.0;
        g_.min_gradient_slack = kInf;
        for (int i = 1; i < g_.nx; ++i)
            for (int k = 1; k + 1 < g_.ny; ++k) {
                const int n = g_.id(i, k);
                g_.residual = std::max(g_.residual, std::abs(q_value(choice[n], g_.V) - g_.V[n]));
                if (pay_[n].mult > 0.0)
                    g_.min_gradient_slack = std::min(g_.min_gradient_slack, g_.V[n] - q_value(pay_[n], g_.V));
                store(n, i, k, choice[n]);
            }
    }

private:
    Choice make_pay(int i, int k) const
    {
        const double x = g_.xs[i], y = g_.y(i, k);
        const double rb = g_.rho_b, rg = g_.rho_g;
        auto inside = [&](double l) {
            const double xf = x - rb * l, yf = y - rg * l;
            if (xf < g_.x0) return false;
            const double tol = 1e-12 * std::max(1.0, std::abs(y));
            return yf >= g_.geometry->lower(xf) - tol && yf <= g_.geometry->upper(xf) + tol;
        };
        double l = g_.hx / rb;
        if (!inside(l)) {
            double lo = 0.0, hi = l;
            for (int t = 0; t < 60; ++t) {
                const double mid = 0.5 * (lo + hi);
                (inside(mid) ? lo : hi) = mid;
            }
            l = lo;
        }
        Choice c;
        c.pay = true;
        if (l <= 1e-14 * std::max(1.0, x)) {
            c.mult = 0.0;  // no room to pay: marks the option as unavailable
            return c;
        }
        c.st = g_.stencil(x - rb * l, y - rg * l);
        c.mult = 1.0;
        c.rhs = -l;
        return c;
    }

    Choice make_cont(double x, double y, double theta, double px, double py, double vprev, int kb, int kg,
                     bool check = true) const
    {
        const double lb = m_.intensity(j_, kb), lg = m_.intensity(j_, kg);
        const double fx = m_.r() * x - m_.B() * kb + lb * (x - theta * px);
        const double fy = m_.r() * y - m_.B() * kg + lg * (y - theta * py);
        const double lam = g_.bank == Bank::good ? lg : lb;
        const double dt = std::abs(fx) > 1e-14 ? std::min(g_.hx / std::abs(fx), tcap_) : tcap_;
        const double e = std::exp(-lam * dt);
        Choice c;
        if (check && !viable(x + fx * dt, y + fy * dt)) {
            c.mult = -1.0;
            return c;
        }
        c.st = g_.stencil(x + fx * dt, y + fy * dt);
        c.mult = e;
        c.rhs = m_.mu() * j_ * (1.0 - e) / lam + (1.0 - e) * theta * vprev;
        c.theta = theta;
        c.px = px;
        c.py = py;
        c.kb = kb;
        c.kg = kg;
        return c;
    }

    int regime(double exposure) const { return exposure < bh_ ? j_ : 0; }

    // The drift must keep the state in the credible set, up to half a row of slack.
    bool viable(double x, double y) const
    {
        if (x < g_.x0 - 1e-12 * std::max(1.0, g_.x0)) return false;
        if (x > g_.x1) {
            y -= g_.rho_g * (x - g_.x1) / g_.rho_b;
            x = g_.x1;
        }
        const double lo = g_.geometry->lower(x), hi = g_.geometry->upper(x);
        return y >= lo - vtol_ && y <= hi + vtol_;
    }

    // Evaluates every continuation control for a given post-default state and keeps the best.
    void try_post(double x, double y, const PostCandidate& p, const std::vector<double>& V, Choice& best,
                  double& bestq) const
    {
        if (p.px > x || p.py > y || p.px <= 0.0) return;
        double ths[6];
        int kbs[6], kgs[6], n = 0;
        auto add = [&](double th, int kb, int kg) {
            if (th <= 0.0 || th > 1.0) return;
            ths[n] = th;
            kbs[n] = kb;
            kgs[n] = kg;
            ++n;
        };
        const double tb = (x - bh_) / p.px, tg = (y - bh_) / p.py;
        std::array<double, 3> pts{tb, tg, 1.0};
        std::sort(pts.begin(), pts.end());
        for (double th : pts) {
            if (th <= 0.0 || th > 1.0) continue;
            // At a threshold the bank is indifferent: evaluate both regimes.
            const int kb0 = regime(x - th * p.px), kg0 = regime(y - th * p.py);
            add(th, kb0, kg0);
            if (th == tb && th < 1.0) add(th, j_, kg0);
            if (th == tg && th < 1.0) add(th, kb0, j_);
        }
        for (int q = 0; q < n; ++q) {
            const Choice c = make_cont(x, y, ths[q], p.px, p.py, p.v, kbs[q], kgs[q]);
            if (c.mult < 0.0) continue;
            const double v = q_value(c, V);
            if (v > bestq + 1e-13 * g_.scale) {
                bestq = v;
                best = c;
            }
        }
    }

    PostCandidate post(int i, int k) const
    {
        return {i, k, prev_->xs[i], prev_->y(i, k), prev_->V[prev_->id(i, k)]};
    }

    int stride() const { return std::max(1, (std::max(prev_->nx, prev_->ny) - 1) / std::max(1, opt_.coarse)); }

    void improve(std::vector<Choice>& choice) const
    {
        const std::vector<double>& V = g_.V;
        std::vector<PostCandidate> coarse;
        if (prev_ != nullptr) {
            const int c = stride();
            auto steps = [&](int n) {
                std::vector<int> v;
                for (int a = 0; a < n; a += c) v.push_back(a);
                if (v.back() != n - 1) v.push_back(n - 1);
                return v;
            };
            for (int i : steps(prev_->nx))
                for (int k : steps(prev_->ny)) coarse.push_back(post(i, k));
        }
        tbb::parallel_for(tbb::blocked_range<int>(1, g_.nx), [&](const tbb::blocked_range<int>& rg) {
            for (int i = rg.begin(); i < rg.end(); ++i)
                for (int k = 1; k + 1 < g_.ny; ++k) {
                    const int n = g_.id(i, k);
                    choice[n] = best_control(i, k, V, coarse, choice[n]);
                }
        });
    }

    Choice best_control(int i, int k, const std::vector<double>& V, const std::vector<PostCandidate>& coarse,
                        const Choice& incumbent) const
    {
        const int n = g_.id(i, k);
        const double x = g_.xs[i], y = g_.y(i, k);
        // Truncation edge: payment is forced.
        if (i == g_.nx - 1 && pay_[n].mult > 0.0) return pay_[n];
        Choice best = make_cont(x, y, 0.0, 0.0, 0.0, 0.0, regime(x), regime(y));
        double bestq = best.mult < 0.0 ? -kInf : q_value(best, V);
        if (prev_ != nullptr) {
            PostCandidate bestp{-1, -1, 0, 0, 0};
            for (const PostCandidate& p : coarse) {
                const double before = bestq;
                try_post(x, y, p, V, best, bestq);
                if (bestq > before) bestp = p;
            }
            // Halve the lattice spacing around the incumbent post-default node.
            for (int h = stride() / 2; h >= 1 && bestp.i >= 0; h /= 2) {
                const PostCandidate centre = bestp;
                for (int a = centre.i - h; a <= centre.i + h; a += h)
                    for (int b = centre.k - h; b <= centre.k + h; b += h) {
                        if (a < 0 || a >= prev_->nx || b < 0 || b >= prev_->ny || (a == centre.i && b == centre.k))
                            continue;
                        const double before = bestq;
                        try_post(x, y, post(a, b), V, best, bestq);
                        if (bestq > before) bestp = post(a, b);
                    }
            }
        }
        if (pay_[n].mult > 0.0) {
            const double qp = q_value(pay_[n], V);
            if (qp > bestq + 1e-13 * g_.scale) {
                best = pay_[n];
                bestq = qp;
            }
        }
        // Nothing viable: keep liquidation with the foot snapped back into the set.
        if (bestq == -kInf) {
            best = make_cont(x, y, 0.0, 0.0, 0.0, 0.0, regime(x), regime(y), false);
        }
        // The candidate search is partial, so keep the incumbent unless it is beaten;
        // this makes each Howard step monotone and rules out cycling.
        if (incumbent.st.n > 0 && q_value(incumbent, V) >= bestq - 1e-13 * g_.scale) return incumbent;
        return best;
    }

    std::vector<double> evaluate(const std::vector<Choice>& choice) const
    {
        const int N = static_cast<int>(g_.size());
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(N * 5);
        Eigen::VectorXd rhs(N);
        for (int i = 0; i < g_.nx; ++i)
            for (int k = 0; k < g_.ny; ++k) {
                const int n = g_.id(i, k);
                trip.emplace_back(n, n, 1.0);
                if (g_.is_fixed(i, k)) {
                    rhs[n] = g_.V[n];
                    continue;
                }
                const Choice& c = choice[n];
                for (int q = 0; q < c.st.n; ++q) trip.emplace_back(n, c.st.idx[q], -c.mult * c.st.w[q]);
                rhs[n] = c.mult * c.st.offset + c.rhs;
            }
        Eigen::SparseMatrix<double> A(N, N);
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(A);
        lu.factorize(A);
        if (lu.info() != Eigen::Success) throw SolverError("policy evaluation matrix is singular");
        const Eigen::VectorXd sol = lu.solve(rhs);
        if (lu.info() != Eigen::Success) throw SolverError("policy evaluation solve failed");
        return std::vector<double>(sol.data(), sol.data() + N);
    }

    void store(int n, int i, int k, const Choice& c)
    {
        const double x = g_.xs[i], y = g_.y(i, k);
        g_.pay[n] = c.pay ? 1 : 0;
        if (c.pay) {
            g_.theta[n] = 0.0;
            g_.h1b[n] = x;
            g_.h1g[n] = y;
            g_.h2b[n] = g_.h2g[n] = 0.0;
            g_.kb[n] = static_cast<std::uint8_t>(regime(x));
            g_.kg[n] = static_cast<std::uint8_t>(regime(y));
            return;
        }
        g_.theta[n] = c.theta;
        g_.h2b[n] = c.theta > 0.0 ? c.px : 0.0;
        g_.h2g[n] = c.theta > 0.0 ? c.py : 0.0;
        g_.h1b[n] = x - g_.h2b[n];
        g_.h1g[n] = y - g_.h2g[n];
        g_.kb[n] = static_cast<std::uint8_t>(c.kb);
        g_.kg[n] = static_cast<std::uint8_t>(c.kg);
    }

    const Model& m_;
    GridValueFunction& g_;
    const GridValueFunction* prev_;
    HjbOptions opt_;
    int j_;
    double bh_, lam_max_, tcap_, vtol_;
    std::vector<Choice> pay_;
};

} // namespace

Stencil GridValueFunction::stencil(double x, double yv) const
{
    Stencil s;
    if (x > x1) {
        const double t = (x - x1) / rho_b;
        x = x1;
        yv -= rho_g * t;
        s.offset = -t;
    }
    x = std::max(x, x0);
    const double xi = (x - x0) / hx;
    int i = static_cast<int>(std::floor(xi));
    double a = xi - i;
    if (a < 1e-9) a = 0.0;
    if (a > 1.0 - 1e-9) {
        ++i;
        a = 0.0;
    }
    if (i >= nx - 1) {
        i = nx - 1;
        a = 0.0;
    }
    double Lx, Ux;
    if (a == 0.0) {
        Lx = L[i];
        Ux = U[i];
    } else {
        Lx = geometry->lower(x);
        Ux = geometry->upper(x);
    }
    double eta = Ux - Lx > 1e-300 ? (yv - Lx) / (Ux - Lx) : 0.0;
    eta = std::clamp(eta, 0.0, 1.0);
    const double pr = eta * (ny - 1);
    int r = std::min(static_cast<int>(std::floor(pr)), ny - 2);
    const double b = pr - r;
    auto put = [&](int col, double wc) {
        if (wc == 0.0) return;
        s.idx[s.n] = id(col, r);
        s.w[s.n++] = wc * (1.0 - b);
        s.idx[s.n] = id(col, r + 1);
        s.w[s.n++] = wc * b;
    };
    put(i, 1.0 - a);
    if (a > 0.0) put(i + 1, a);
    return s;
}

double GridValueFunction::value(double x, double yv) const
{
    const Stencil s = stencil(x, yv);
    return apply(s, V);
}

bool GridValueFunction::paying(double x, double yv) const
{
    if (x > x1) return true;
    const double xi = std::clamp((x - x0) / hx, 0.0, static_cast<double>(nx - 1));
    const int i = static_cast<int>(std::lround(xi));
    const double Lx = geometry->lower(std::max(x, x0)), Ux = geometry->upper(std::max(x, x0));
    const double eta = Ux - Lx > 1e-300 ? std::clamp((yv - Lx) / (Ux - Lx), 0.0, 1.0) : 0.0;
    const int k = static_cast<int>(std::lround(eta * (ny - 1)));
    return pay[id(i, k)] != 0;
}

GridValueFunction build_domain(const Model& m, int j, Bank bank, const PmhSolution& pmh, const HjbOptions& opt)
{
    if (opt.nx < 16 || opt.ny < 16) throw DomainError("grid resolution must be at least 16 per axis");
    GridValueFunction g;
    g.geometry = std::make_shared<const CredibleSet>(m, j);
    const CredibleSet& cs = *g.geometry;
    g.j = j;
    g.bank = bank;
    g.nx = opt.nx;
    g.ny = opt.ny;
    g.rho_b = m.params().rho_b;
    g.rho_g = m.params().rho_g;
    g.x0 = cs.c1();
    g.x1 = opt.u_max > 0.0 ? opt.u_max : std::max(3.0 * cs.b_hat(), 2.0 * cs.C());
    if (!(g.x1 > g.x0)) throw DomainError("truncation u_max must exceed c(j,1)");
    g.hx = (g.x1 - g.x0) / (g.nx - 1);
    g.scale = m.mu() * j / m.lambda_0(j);
    for (int i = 0; i < g.nx; ++i) {
        const double x = i == g.nx - 1 ? g.x1 : g.x0 + i * g.hx;
        g.xs.push_back(x);
        g.L.push_back(cs.lower(x));
        g.U.push_back(cs.upper(x));
    }
    const std::size_t N = static_cast<std::size_t>(g.nx) * g.ny;
    g.V.assign(N, 0.0);
    g.theta.assign(N, 0.0);
    g.h1b.assign(N, 0.0);
    g.h1g.assign(N, 0.0);
    g.h2b.assign(N, 0.0);
    g.h2g.assign(N, 0.0);
    g.pay.assign(N, 0);
    g.kb.assign(N, 0);
    g.kg.assign(N, 0);
    const double tip = m.mu() * j / m.lambda_sh(j);
    const LowerDual dual(m, j);
    for (int i = 0; i < g.nx; ++i) {
        const double x = g.xs[i];
        double lo, hi;
        if (i == 0) {
            lo = hi = tip;
        } else {
            lo = x >= cs.C() ? value_lower(m, j, x) : dual.solve(x).primal_value;
            hi = bank == Bank::good ? value_upper_good(m, j, &pmh, x) : value_upper_bad(m, j, &pmh, x);
        }
        for (int k = 0; k < g.ny; ++k) {
            const double t = static_cast<double>(k) / (g.ny - 1);
            g.V[g.id(i, k)] = i == 0 ? tip : lo + t * (hi - lo);
        }
    }
    return g;
}

GridValueFunction solve_vi(const Model& m, int j, Bank bank, const PmhSolution& pmh,
                           const GridValueFunction* prev, const HjbOptions& opt)
{
    if (j > 1 && (prev == nullptr || prev->j != j - 1 || prev->bank != bank))
        throw DomainError("interior level j needs the level j-1 solution of the same system");
    GridValueFunction g = build_domain(m, j, bank, pmh, opt);
    Solver s(m, g, j > 1 ? prev : nullptr, opt);
    s.run();
    return g;
}

std::vector<GridValueFunction> solve_hjb_levels(const Model& m, int J, Bank bank,
                                                const std::vector<PmhSolution>& pmh, const HjbOptions& opt)
{
    if (J < 1 || J > m.I()) throw DomainError("level count outside [1, I]");
    std::vector<GridValueFunction> out;
    out.reserve(J);
    for (int j = 1; j <= J; ++j)
        out.push_back(solve_vi(m, j, bank, pmh[j - 1], j > 1 ? &out.back() : nullptr, opt));
    return out;
}

PolicyAt extract_policy(const GridValueFunction& g, int i, int k)
{
    if (i < 0 || i >= g.nx || k < 0 || k >= g.ny) throw DomainError("node outside the grid");
    const int n = g.id(i, k);
    PolicyAt p;
    p.pay = g.pay[n] != 0;
    p.theta = g.theta[n];
    p.h1b = g.h1b[n];
    p.h2b = g.h2b[n];
    p.h1g = g.h1g[n];
    p.h2g = g.h2g[n];
    p.kb = g.kb[n];
    p.kg = g.kg[n];
    return p;
}

double boundary_row_gap(const GridValueFunction& g)
{
    double e = 0.0;
    for (int i = 1; i < g.nx; ++i) {
        e = std::max(e, std::abs(g.V[g.id(i, 1)] - g.V[g.id(i, 0)]));
        e = std::max(e, std::abs(g.V[g.id(i, g.ny - 2)] - g.V[g.id(i, g.ny - 1)]));
    }
    return e;
}

MenuValue optimal_menu_value(const Model& m, const GridValueFunction& Vg, const GridValueFunction& Vb,
                             double R0_b, double R0_g, int raster)
{
    if (raster < 8) throw DomainError("raster must have at least 8 points per axis");
    const double pg = m.params().p_g, pb = m.params().p_b;
    const double xlo = std::min(Vg.x0, Vb.x0), xhi = std::max(Vg.x1, Vb.x1);
    double ylo = kInf, yhi = -kInf;
    for (const GridValueFunction* g : {&Vg, &Vb})
        for (int i = 0; i < g->nx; ++i) {
            ylo = std::min(ylo, g->L[i]);
            yhi = std::max(yhi, g->U[i]);
        }
    const int n = raster;
    std::vector<double> X(n), Y(n);
    for (int a = 0; a < n; ++a) {
        X[a] = xlo + (xhi - xlo) * a / (n - 1);
        Y[a] = ylo + (yhi - ylo) * a / (n - 1);
    }
    auto sample = [&](const GridValueFunction& g, double x, double y) {
        if (x < g.x0 || x > g.x1 || !g.geometry->contains(x, y)) return -kInf;
        return g.value(x, y);
    };
    std::vector<double> G(n * n), Bv(n * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            G[a * n + b] = sample(Vg, X[a], Y[b]);
            Bv[a * n + b] = sample(Vb, X[a], Y[b]);
        }
    MenuValue out;
    out.v_shutdown = -kInf;
    for (int a = 0; a < n && X[a] <= R0_b; ++a)
        for (int b = 0; b < n; ++b)
            if (Y[b] >= R0_g && G[a * n + b] > -kInf && pg * G[a * n + b] > out.v_shutdown) {
                out.v_shutdown = pg * G[a * n + b];
                out.shut_ub = X[a];
                out.shut_ug = Y[b];
                out.feasible_shutdown = true;
            }
    // Grid nodes, boundary rows included, and the boundary points at u_bc = R0_b.
    struct Pt { double x, y, v; };
    std::vector<Pt> nodes;
    for (int i = 0; i < Vg.nx; ++i)
        for (int k = 0; k < Vg.ny; ++k) nodes.push_back({Vg.xs[i], Vg.y(i, k), Vg.V[Vg.id(i, k)]});
    if (R0_b >= Vg.x0) {
        const double x = std::min(R0_b, Vg.x1);
        // The lower row carries the closed form, which peaks at C between nodes.
        nodes.push_back({x, Vg.geometry->lower(x), value_lower(m, Vg.j, x)});
        const double yu = Vg.geometry->upper(x);
        nodes.push_back({x, yu, Vg.value(x, yu)});
    }
    for (const Pt& p : nodes)
        if (p.x <= R0_b && p.y >= R0_g && pg * p.v > out.v_shutdown) {
            out.v_shutdown = pg * p.v;
            out.shut_ub = p.x;
            out.shut_ug = p.y;
            out.feasible_shutdown = true;
        }
    // Prefix maxima: good contract over u_bc <= u_b, bad contract over u_gc <= u_g.
    std::vector<double> Gp(n * n), Bp(n * n);
    std::vector<int> Garg(n * n), Barg(n * n);
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            const int q = a * n + b;
            Gp[q] = G[q];
            Garg[q] = a;
            if (a > 0 && Gp[(a - 1) * n + b] > Gp[q]) {
                Gp[q] = Gp[(a - 1) * n + b];
                Garg[q] = Garg[(a - 1) * n + b];
            }
        }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const int q = a * n + b;
            Bp[q] = Bv[q];
            Barg[q] = b;
            if (b > 0 && Bp[q - 1] > Bp[q]) {
                Bp[q] = Bp[q - 1];
                Barg[q] = Barg[q - 1];
            }
        }
    out.v_screening = -kInf;
    for (int a = 0; a < n; ++a) {
        if (X[a] < R0_b) continue;
        for (int b = 0; b < n; ++b) {
            if (Y[b] < R0_g) continue;
            const int q = a * n + b;
            if (Gp[q] == -kInf || Bp[q] == -kInf) continue;
            const double v = pg * Gp[q] + pb * Bp[q];
            if (v > out.v_screening) {
                out.v_screening = v;
                out.feasible_screening = true;
                out.scr_ub = X[a];
                out.scr_ug = Y[b];
                out.scr_ubc = X[Garg[q]];
                out.scr_ugc = Y[Barg[q]];
            }
        }
    }
    // Good-contract grid nodes paired with the best raster bad contract: max over
    // u_b >= max(R0_b, u_bc) and u_gc <= u_g.
    std::vector<double> M(n * n, -kInf);
    std::vector<int> Ma(n * n, 0), Mb(n * n, 0);
    for (int a = n - 1; a >= 0; --a)
        for (int b = 0; b < n; ++b) {
            const int q = a * n + b;
            M[q] = Bv[q];
            Ma[q] = a;
            Mb[q] = b;
            if (b > 0 && M[q - 1] > M[q]) {
                M[q] = M[q - 1];
                Ma[q] = Ma[q - 1];
                Mb[q] = Mb[q - 1];
            }
            if (a + 1 < n && M[q + n] > M[q]) {
                M[q] = M[q + n];
                Ma[q] = Ma[q + n];
                Mb[q] = Mb[q + n];
            }
        }
    for (const Pt& p : nodes) {
        if (p.y < R0_g) continue;
        const double xmin = std::max(R0_b, p.x);
        const int a = static_cast<int>(std::lower_bound(X.begin(), X.end(), xmin) - X.begin());
        const int b = static_cast<int>(std::upper_bound(Y.begin(), Y.end(), p.y) - Y.begin()) - 1;
        if (a >= n || b < 0) continue;
        const int q = a * n + b;
        if (M[q] == -kInf) continue;
        const double v = pg * p.v + pb * M[q];
        if (v > out.v_screening) {
            out.v_screening = v;
            out.feasible_screening = true;
            out.scr_ubc = p.x;
            out.scr_ug = p.y;
            out.scr_ub = X[Ma[q]];
            out.scr_ugc = Y[Mb[q]];
        }
    }
    return out;
}

// ---- GridPolicyContract ----

GridPolicyContract::GridPolicyContract(const Model& m, const GridValueFunction& g, double x0, double y0,
                                       double dt_frac)
    : m_(&m), g_(&g), x0_(x0), y0_(y0), x_(x0), y_(y0), dt_frac_(dt_frac)
{
    if (g.j != 1) throw DomainError("grid policy simulation is implemented for a single loan");
    if (!g.geometry->contains(x0, y0)) throw DomainError("initial state outside the credible set");
}

double GridPolicyContract::settle()
{
    double paid = 0.0;
    const double l = g_->hx / g_->rho_b * 0.25;
    for (int guard = 0; guard < 100000 && g_->paying(x_, y_); ++guard) {
        const double xn = x_ - g_->rho_b * l, yn = y_ - g_->rho_g * l;
        if (xn < g_->x0 || !g_->geometry->contains(xn, yn)) break;
        x_ = xn;
        y_ = yn;
        paid += l;
    }
    return paid;
}

double GridPolicyContract::start()
{
    j_ = 1;
    x_ = x0_;
    y_ = y0_;
    pending_ = 0.0;
    return settle();
}

Segment GridPolicyContract::segment() const
{
    const double bh = m_->b_hat(1), r = m_->r(), B = m_->B();
    Segment s;
    const int kb = x_ < bh ? 1 : 0, kg = y_ < bh ? 1 : 0;
    s.k_rec[static_cast<int>(Bank::bad)] = kb;
    s.k_rec[static_cast<int>(Bank::good)] = kg;
    s.exposure[static_cast<int>(Bank::bad)] = x_;
    s.exposure[static_cast<int>(Bank::good)] = y_;
    const double fx = (r + m_->intensity(1, kb)) * x_ - B * kb;
    const double tcap = 1.0 / (4.0 * m_->lambda_sh(1));
    double d = std::abs(fx) > 1e-14 ? std::min(dt_frac_ * g_->hx / std::abs(fx), tcap) : tcap;
    // Split exactly at threshold crossings so the intensity stays constant.
    auto hit = [&](double u, int k) {
        if (u >= bh) return kInf;
        const double a = r + m_->intensity(1, k), c = B * k / a;
        if (u <= c) return kInf;
        return std::log((bh - c) / (u - c)) / a;
    };
    d = std::min({d, hit(x_, kb), hit(y_, kg)});
    s.duration = std::max(d, 1e-12);
    s.lump = pending_;
    pending_ = 0.0;
    return s;
}

void GridPolicyContract::advance(double dt)
{
    const double bh = m_->b_hat(1), r = m_->r(), B = m_->B();
    auto flow = [&](double u) {
        const int k = u < bh ? 1 : 0;
        const double a = r + m_->intensity(1, k), c = B * k / a;
        const double v = (u - c) * std::exp(a * dt) + c;
        return (u < bh && std::abs(v - bh) < 1e-12 * bh) ? bh : v;
    };
    x_ = flow(x_);
    y_ = flow(y_);
    pending_ = settle();
}

} // namespace contractlab
