#include "fkmc/kernel_table.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "fkmc/errors.hpp"
#include "fkmc/kernels.hpp"
#include "fkmc/rng.hpp"

namespace fkmc {

namespace {

const char kMagic[4] = {'F', 'K', 'T', 'B'};
constexpr uint32_t kVersion = 1;

void catmull_rom(double s, double w[4]) {
    w[0] = ((-0.5 * s + 1.0) * s - 0.5) * s;
    w[1] = (1.5 * s - 2.5) * s * s + 1.0;
    w[2] = ((-1.5 * s + 2.0) * s + 0.5) * s;
    w[3] = (0.5 * s - 0.5) * s * s;
}

// Radial weights: C^1 cubic Hermite on interval [i, i+1] with 4th-order
// finite-difference slopes (5-point stencils, one-sided at the grid edges).
// Central-difference slopes (Catmull-Rom) are only 3rd order, which is not
// enough for the cos(lambda r)-type oscillation at the large-r end of a log
// grid; the wider stencil buys the missing order at the same node count.
// Six taps over nodes base..base+5; weights sum to the Hermite combination
//   f_i h00 + f_{i+1} h01 + m_i h10 + m_{i+1} h11  (slopes in grid units).
struct RadialWeights {
    int base;
    double w[6];
};

RadialWeights hermite_weights(int i, double s, int n) {
    RadialWeights rw;
    rw.base = std::min(std::max(i - 2, 0), n - 6);
    for (double& x : rw.w) x = 0.0;
    auto add = [&](int node, double c) { rw.w[node - rw.base] += c; };
    const double h00 = (2.0 * s - 3.0) * s * s + 1.0;
    const double h01 = (3.0 - 2.0 * s) * s * s;
    const double h10 = ((s - 2.0) * s + 1.0) * s;
    const double h11 = (s - 1.0) * s * s;
    add(i, h00);
    add(i + 1, h01);
    auto add_slope = [&](int j, double c) {
        c /= 12.0;
        if (j >= 2 && j + 2 <= n - 1) {
            add(j - 2, c);
            add(j - 1, -8.0 * c);
            add(j + 1, 8.0 * c);
            add(j + 2, -c);
        } else if (j < 2) {
            add(j - 1, -3.0 * c);
            add(j, -10.0 * c);
            add(j + 1, 18.0 * c);
            add(j + 2, -6.0 * c);
            add(j + 3, c);
        } else {
            add(j + 1, 3.0 * c);
            add(j, 10.0 * c);
            add(j - 1, -18.0 * c);
            add(j - 2, 6.0 * c);
            add(j - 3, -c);
        }
    };
    add_slope(i, h10);
    add_slope(i + 1, h11);
    return rw;
}

// Locate u on the padded log grid: cell index i in [1, n-3] and local
// coordinate s in [0, 1].  s snaps to the endpoints so probes at grid
// nodes reproduce stored values exactly despite log/exp round-trips.
void locate(double u, double u0, double du, int n, int& i, double& s) {
    const double x = (u - u0) / du;
    i = static_cast<int>(std::floor(x));
    if (i < 1) i = 1;
    if (i > n - 3) i = n - 3;
    s = x - i;
    if (s < 1e-9) s = 0.0;
    if (s > 1.0 - 1e-9) s = 1.0;
}

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

std::function<double(double, double)> kernel_function(KernelId id, const ModelParams& params,
                                                      const QuadratureConfig& quad) {
    const int d = params.d;
    const double eps = params.epsilon, lam = params.lambda;
    switch (id) {
        case KernelId::pair_potential:
            return [=](double r, double t) { return pair_potential_w(d, eps, lam, r, t, quad); };
        case KernelId::rho:
            return [=](double r, double t) { return rho_kernel(d, eps, lam, r, t, quad); };
        case KernelId::rho_radial_derivative:
            return [=](double r, double t) {
                return rho_radial_derivative(d, eps, lam, r, t, quad);
            };
        case KernelId::polaron:
            return [=](double r, double t) { return polaron_w(eps, lam, r, t, quad); };
    }
    throw std::invalid_argument("kernel_function: unknown kernel id");
}

void KernelTable::init_grid() {
    if (!(spec_.r_min > 0) || !(spec_.r_max > spec_.r_min) || !(spec_.t_min > 0) ||
        !(spec_.t_max > spec_.t_min))
        throw std::invalid_argument("kernel table: hull bounds must satisfy 0 < min < max");
    if (spec_.n_r < 8 || spec_.n_t < 8)
        throw std::invalid_argument("kernel table: need at least 8 nodes per axis");
    du_r_ = (std::log(spec_.r_max) - std::log(spec_.r_min)) / (spec_.n_r - 3);
    u0_r_ = std::log(spec_.r_min) - du_r_;
    du_t_ = (std::log(spec_.t_max) - std::log(spec_.t_min)) / (spec_.n_t - 3);
    u0_t_ = std::log(spec_.t_min) - du_t_;
}

double KernelTable::r_node(int i) const { return std::exp(u0_r_ + i * du_r_); }
double KernelTable::t_node(int j) const { return std::exp(u0_t_ + j * du_t_); }

KernelTable KernelTable::build(KernelId id, const ModelParams& params, const TableGridSpec& spec,
                               const QuadratureConfig& quad) {
    KernelTable tb;
    tb.id_ = id;
    tb.params_ = params;
    tb.spec_ = spec;
    tb.quad_ = quad;
    tb.direct_ = kernel_function(id, params, quad);
    tb.init_grid();
    tb.values_.resize(static_cast<size_t>(spec.n_r) * spec.n_t);
    for (int i = 0; i < spec.n_r; ++i) {
        const double r = tb.r_node(i);
        for (int j = 0; j < spec.n_t; ++j) {
            const double v = tb.direct_(r, tb.t_node(j));
            tb.values_[static_cast<size_t>(i) * spec.n_t + j] = v;
            tb.max_abs_ = std::max(tb.max_abs_, std::abs(v));
        }
    }
    tb.interp_error_bound_ = tb.validate(spec.n_validation_probes, spec.validation_seed);
    if (tb.interp_error_bound_ > spec.requested_error_bound)
        throw TableValidationError("kernel table validation: measured error bound " +
                                   std::to_string(tb.interp_error_bound_) + " exceeds requested " +
                                   std::to_string(spec.requested_error_bound));
    return tb;
}

bool KernelTable::in_hull(double r, double t) const {
    t = std::abs(t);
    return r >= spec_.r_min && r <= spec_.r_max && t >= spec_.t_min && t <= spec_.t_max;
}

double KernelTable::interpolate(double r, double t) const {
    const TStencil s = t_stencil(std::abs(t));
    return interpolate_at(s, r);
}

KernelTable::TStencil KernelTable::t_stencil(double t) const {
    TStencil st;
    st.t = t = std::abs(t);
    st.inside = t >= spec_.t_min && t <= spec_.t_max;
    if (!st.inside) return st;
    int j;
    double s;
    locate(std::log(t), u0_t_, du_t_, spec_.n_t, j, s);
    st.j = j;
    double w[4];
    catmull_rom(s, w);
    st.w0 = w[0];
    st.w1 = w[1];
    st.w2 = w[2];
    st.w3 = w[3];
    return st;
}

double KernelTable::interpolate_at(const TStencil& st, double r) const {
    int i;
    double s;
    locate(std::log(r), u0_r_, du_r_, spec_.n_r, i, s);
    const RadialWeights rw = hermite_weights(i, s, spec_.n_r);
    const int n_t = spec_.n_t;
    double acc = 0.0;
    for (int a = 0; a < 6; ++a) {
        if (rw.w[a] == 0.0) continue;
        const double* row = &values_[static_cast<size_t>(rw.base + a) * n_t + (st.j - 1)];
        acc += rw.w[a] * (st.w0 * row[0] + st.w1 * row[1] + st.w2 * row[2] + st.w3 * row[3]);
    }
    return acc;
}

double KernelTable::operator()(double r, double t) const {
    return in_hull(r, t) ? interpolate(r, t) : direct_(r, std::abs(t));
}

double KernelTable::validate(int n_probes, uint64_t seed) const {
    const double lr = std::log(spec_.r_min), sr = std::log(spec_.r_max) - lr;
    const double lt = std::log(spec_.t_min), st = std::log(spec_.t_max) - lt;
    // Sign-changing kernels (rho at large r) pass through zero inside the
    // hull; a pure relative metric diverges there for any interpolant.  The
    // floor switches to an absolute scale 1e-3 of the table's dynamic range,
    // which is what bounds the error contribution to an action sum.
    const double floor_scale = 1e-3 * max_abs_;
    double worst = 0.0;
    for (int p = 0; p < n_probes; ++p) {
        const auto bits = philox4x64({static_cast<uint64_t>(p), 0, 0, 0},
                                     {seed, 0x9E3779B97F4A7C15ull});
        double r = std::exp(lr + uniform_from_bits(bits[0]) * sr);
        double t = std::exp(lt + uniform_from_bits(bits[1]) * st);
        r = std::min(std::max(r, spec_.r_min), spec_.r_max);
        t = std::min(std::max(t, spec_.t_min), spec_.t_max);
        const double direct = direct_(r, t);
        const double err =
            std::abs(interpolate(r, t) - direct) / std::max(std::abs(direct), floor_scale);
        worst = std::max(worst, err);
    }
    return worst;
}

void KernelTable::save_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("kernel table: cannot open for writing: " + path);
    out.write(kMagic, 4);
    put(out, kVersion);
    put(out, static_cast<uint32_t>(id_));
    put(out, static_cast<int32_t>(params_.d));
    put(out, params_.g);
    put(out, params_.lambda);
    put(out, params_.epsilon);
    put(out, params_.horizon);
    put(out, static_cast<uint32_t>(spec_.n_r));
    put(out, static_cast<uint32_t>(spec_.n_t));
    put(out, spec_.r_min);
    put(out, spec_.r_max);
    put(out, spec_.t_min);
    put(out, spec_.t_max);
    put(out, spec_.requested_error_bound);
    put(out, static_cast<uint32_t>(spec_.n_validation_probes));
    put(out, spec_.validation_seed);
    put(out, interp_error_bound_);
    put(out, max_abs_);
    out.write(reinterpret_cast<const char*>(values_.data()),
              static_cast<std::streamsize>(values_.size() * sizeof(double)));
    if (!out) throw std::runtime_error("kernel table: write failed: " + path);
}

KernelTable KernelTable::load_binary(const std::string& path, const QuadratureConfig& quad) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("kernel table: cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("kernel table: bad magic in " + path);
    uint32_t version;
    get(in, version);
    if (version != kVersion)
        throw std::runtime_error("kernel table: unsupported version " + std::to_string(version));
    KernelTable tb;
    uint32_t id32, n_r, n_t, n_probes;
    int32_t d;
    get(in, id32);
    get(in, d);
    tb.id_ = static_cast<KernelId>(id32);
    tb.params_.model = tb.id_ == KernelId::polaron ? Model::polaron : Model::nelson;
    tb.params_.d = d;
    get(in, tb.params_.g);
    get(in, tb.params_.lambda);
    get(in, tb.params_.epsilon);
    get(in, tb.params_.horizon);
    tb.params_.total_momentum = Eigen::VectorXd::Zero(d);
    get(in, n_r);
    get(in, n_t);
    tb.spec_.n_r = static_cast<int>(n_r);
    tb.spec_.n_t = static_cast<int>(n_t);
    get(in, tb.spec_.r_min);
    get(in, tb.spec_.r_max);
    get(in, tb.spec_.t_min);
    get(in, tb.spec_.t_max);
    get(in, tb.spec_.requested_error_bound);
    get(in, n_probes);
    tb.spec_.n_validation_probes = static_cast<int>(n_probes);
    get(in, tb.spec_.validation_seed);
    get(in, tb.interp_error_bound_);
    get(in, tb.max_abs_);
    tb.values_.resize(static_cast<size_t>(n_r) * n_t);
    in.read(reinterpret_cast<char*>(tb.values_.data()),
            static_cast<std::streamsize>(tb.values_.size() * sizeof(double)));
    if (!in) throw std::runtime_error("kernel table: truncated file: " + path);
    tb.quad_ = quad;
    tb.direct_ = kernel_function(tb.id_, tb.params_, quad);
    tb.init_grid();
    return tb;
}

void KernelTable::write_csv(std::ostream& out) const {
    const char* names[] = {"pair_potential", "rho", "rho_radial_derivative", "polaron"};
    out << "# kernel=" << names[static_cast<uint32_t>(id_)] << " d=" << params_.d
        << " eps=" << params_.epsilon << " lambda=" << params_.lambda
        << " interp_error_bound=" << interp_error_bound_ << "\n";
    out << "r,t,value\n";
    char buf[96];
    for (int i = 0; i < spec_.n_r; ++i)
        for (int j = 0; j < spec_.n_t; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", r_node(i), t_node(j),
                          value_at(i, j));
            out << buf;
        }
}

RadialTable RadialTable::build(const std::function<double(double)>& fn, double r_min,
                               double r_max, int n_nodes) {
    if (!(r_min > 0) || !(r_max > r_min) || n_nodes < 8)
        throw std::invalid_argument("radial table: need 0 < r_min < r_max and >= 8 nodes");
    RadialTable tb;
    tb.r_min_ = r_min;
    tb.r_max_ = r_max;
    tb.du_ = (std::log(r_max) - std::log(r_min)) / (n_nodes - 3);
    tb.u0_ = std::log(r_min) - tb.du_;
    tb.values_.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) tb.values_[i] = fn(tb.node(i));
    return tb;
}

double RadialTable::node(int i) const { return std::exp(u0_ + i * du_); }

double RadialTable::interpolate(double r) const {
    int i;
    double s;
    locate(std::log(r), u0_, du_, size(), i, s);
    const RadialWeights rw = hermite_weights(i, s, size());
    double acc = 0.0;
    for (int a = 0; a < 6; ++a) acc += rw.w[a] * values_[rw.base + a];
    return acc;
}

}  // namespace fkmc
