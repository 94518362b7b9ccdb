#include "clab/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "clab/errors.hpp"
#include "clab/rng.hpp"

namespace clab::objectives {

namespace {

void require_dense_dim(int d, const char* what) {
    if (d > kDenseDimLimit)
        throw ValidationError(std::string(what) + " requires d <= " +
                              std::to_string(kDenseDimLimit) + ", got d = " + std::to_string(d));
}

double stable_softplus(double z) {
    // log(1 + e^z) without overflow on either tail.
    if (z > 30.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

void Dataset::shard_uniform(int m) {
    if (m < 1) throw ValidationError("sharding requires m >= 1");
    if (n < m)
        throw ValidationError("dataset has " + std::to_string(n) + " samples, fewer than m = " +
                              std::to_string(m) + " workers");
    shards.assign(static_cast<size_t>(m), {});
    for (int j = 0; j < m; ++j) {
        int lo = static_cast<int>(static_cast<int64_t>(j) * n / m);
        int hi = static_cast<int>(static_cast<int64_t>(j + 1) * n / m);
        for (int z = lo; z < hi; ++z) shards[static_cast<size_t>(j)].push_back(z);
    }
}

std::vector<int> Dataset::all_indices() const {
    std::vector<int> idx(static_cast<size_t>(n));
    for (int z = 0; z < n; ++z) idx[static_cast<size_t>(z)] = z;
    return idx;
}

void Objective::sample_hessian(const Vec&, int, Mat&) const {
    throw ValidationError("objective has no analytic per-sample Hessian");
}

// --- quadratic ---------------------------------------------------------------

QuadraticObjective::QuadraticObjective(std::vector<Mat> h, std::vector<Vec> b)
    : h_(std::move(h)), b_(std::move(b)) {
    if (h_.empty() || h_.size() != b_.size())
        throw ValidationError("quadratic objective needs matching nonempty H and b lists");
    d_ = h_[0].rows;
    n_ = static_cast<int>(h_.size());
    analytic_hessian_ = true;
}

double QuadraticObjective::sample_loss(const Vec& w, int z) const {
    const Mat& h = h_[static_cast<size_t>(z)];
    const Vec& b = b_[static_cast<size_t>(z)];
    return 0.5 * dot(w, matvec(h, w)) + dot(b, w);
}

void QuadraticObjective::sample_grad(const Vec& w, int z, Vec& g) const {
    g = matvec(h_[static_cast<size_t>(z)], w);
    axpy(1.0, b_[static_cast<size_t>(z)], g);
}

void QuadraticObjective::sample_hessian(const Vec&, int z, Mat& h) const {
    h = h_[static_cast<size_t>(z)];
}

// --- cubic perturbed ---------------------------------------------------------

CubicPerturbedObjective::CubicPerturbedObjective(std::vector<Mat> h, std::vector<Vec> b,
                                                 std::vector<Vec> c, double cubic_scale,
                                                 double quartic_coeff)
    : h_(std::move(h)),
      b_(std::move(b)),
      c_(std::move(c)),
      cubic_scale_(cubic_scale),
      quartic_coeff_(quartic_coeff) {
    if (h_.empty() || h_.size() != b_.size() || h_.size() != c_.size())
        throw ValidationError("cubic objective needs matching nonempty H, b, c lists");
    d_ = h_[0].rows;
    n_ = static_cast<int>(h_.size());
    analytic_hessian_ = true;
}

double CubicPerturbedObjective::sample_loss(const Vec& w, int z) const {
    const Vec& c = c_[static_cast<size_t>(z)];
    double loss = 0.5 * dot(w, matvec(h_[static_cast<size_t>(z)], w)) + dot(b_[static_cast<size_t>(z)], w);
    double cubic = 0.0, sq = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        cubic += c[i] * w[i] * w[i] * w[i];
        sq += w[i] * w[i];
    }
    return loss + cubic_scale_ * cubic + quartic_coeff_ * sq * sq;
}

void CubicPerturbedObjective::sample_grad(const Vec& w, int z, Vec& g) const {
    g = matvec(h_[static_cast<size_t>(z)], w);
    axpy(1.0, b_[static_cast<size_t>(z)], g);
    const Vec& c = c_[static_cast<size_t>(z)];
    double sq = 0.0;
    for (double v : w) sq += v * v;
    for (size_t i = 0; i < w.size(); ++i)
        g[i] += 3.0 * cubic_scale_ * c[i] * w[i] * w[i] + 4.0 * quartic_coeff_ * sq * w[i];
}

void CubicPerturbedObjective::sample_hessian(const Vec& w, int z, Mat& h) const {
    h = h_[static_cast<size_t>(z)];
    const Vec& c = c_[static_cast<size_t>(z)];
    double sq = 0.0;
    for (double v : w) sq += v * v;
    const int d = dim();
    for (int i = 0; i < d; ++i) {
        h(i, i) += 6.0 * cubic_scale_ * c[static_cast<size_t>(i)] * w[static_cast<size_t>(i)] +
                   4.0 * quartic_coeff_ * sq;
        for (int j = 0; j < d; ++j)
            h(i, j) += 8.0 * quartic_coeff_ * w[static_cast<size_t>(i)] * w[static_cast<size_t>(j)];
    }
}

// --- one-hidden-layer network --------------------------------------------------

MlpObjective::MlpObjective(int hidden, std::vector<Vec> features, std::vector<int> labels)
    : hidden_(hidden), features_(std::move(features)), labels_(std::move(labels)) {
    if (hidden_ < 1) throw ValidationError("network needs hidden width >= 1");
    if (features_.empty() || features_.size() != labels_.size())
        throw ValidationError("network needs matching nonempty features and labels");
    input_dim_ = static_cast<int>(features_[0].size());
    for (const Vec& x : features_)
        if (static_cast<int>(x.size()) != input_dim_)
            throw ValidationError("network features have inconsistent dimension");
    for (int y : labels_)
        if (y != 0 && y != 1) throw ValidationError("network labels must be 0 or 1");
    d_ = hidden_ * input_dim_ + 2 * hidden_ + 1;
    n_ = static_cast<int>(features_.size());
    analytic_hessian_ = false;
}

double MlpObjective::logit(const Vec& w, int z, Vec& act) const {
    const Vec& x = features_[static_cast<size_t>(z)];
    const int h = hidden_, p = input_dim_;
    act.assign(static_cast<size_t>(h), 0.0);
    for (int i = 0; i < h; ++i) {
        double a = w[static_cast<size_t>(h * p + i)];  // b1[i]
        for (int j = 0; j < p; ++j) a += w[static_cast<size_t>(i * p + j)] * x[static_cast<size_t>(j)];
        act[static_cast<size_t>(i)] = std::tanh(a);
    }
    double zlogit = w[static_cast<size_t>(h * p + 2 * h)];  // b2
    for (int i = 0; i < h; ++i) zlogit += w[static_cast<size_t>(h * p + h + i)] * act[static_cast<size_t>(i)];
    return zlogit;
}

double MlpObjective::sample_loss(const Vec& w, int z) const {
    Vec act;
    double logit_z = logit(w, z, act);
    return stable_softplus(logit_z) - static_cast<double>(labels_[static_cast<size_t>(z)]) * logit_z;
}

void MlpObjective::sample_grad(const Vec& w, int z, Vec& g) const {
    const Vec& x = features_[static_cast<size_t>(z)];
    const int h = hidden_, p = input_dim_;
    Vec act;
    double logit_z = logit(w, z, act);
    double dz = sigmoid(logit_z) - static_cast<double>(labels_[static_cast<size_t>(z)]);

    g.assign(w.size(), 0.0);
    for (int i = 0; i < h; ++i) {
        double w2i = w[static_cast<size_t>(h * p + h + i)];
        double da = dz * w2i * (1.0 - act[static_cast<size_t>(i)] * act[static_cast<size_t>(i)]);
        for (int j = 0; j < p; ++j) g[static_cast<size_t>(i * p + j)] = da * x[static_cast<size_t>(j)];
        g[static_cast<size_t>(h * p + i)] = da;                          // b1[i]
        g[static_cast<size_t>(h * p + h + i)] = dz * act[static_cast<size_t>(i)];  // w2[i]
    }
    g[static_cast<size_t>(h * p + 2 * h)] = dz;  // b2
}

std::vector<std::vector<int>> MlpObjective::filter_groups() const {
    const int h = hidden_, p = input_dim_;
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < h; ++i) {
        std::vector<int> grp;
        for (int j = 0; j < p; ++j) grp.push_back(i * p + j);
        grp.push_back(h * p + i);
        groups.push_back(std::move(grp));
    }
    std::vector<int> out;
    for (int i = 0; i < h; ++i) out.push_back(h * p + h + i);
    out.push_back(h * p + 2 * h);
    groups.push_back(std::move(out));
    return groups;
}

// --- huberized kink -----------------------------------------------------------

HuberKinkObjective::HuberKinkObjective(std::vector<double> centers, double delta)
    : centers_(std::move(centers)), delta_(delta) {
    if (centers_.empty()) throw ValidationError("kink objective needs at least one sample");
    if (delta_ <= 0.0) throw ValidationError("kink objective needs delta > 0");
    d_ = 1;
    n_ = static_cast<int>(centers_.size());
    analytic_hessian_ = true;
}

double HuberKinkObjective::sample_loss(const Vec& w, int z) const {
    double u = w[0] - centers_[static_cast<size_t>(z)];
    if (std::fabs(u) <= delta_) return u * u / (2.0 * delta_);
    return std::fabs(u) - delta_ / 2.0;
}

void HuberKinkObjective::sample_grad(const Vec& w, int z, Vec& g) const {
    double u = w[0] - centers_[static_cast<size_t>(z)];
    g.assign(1, std::fabs(u) <= delta_ ? u / delta_ : (u > 0.0 ? 1.0 : -1.0));
}

void HuberKinkObjective::sample_hessian(const Vec& w, int z, Mat& h) const {
    double u = w[0] - centers_[static_cast<size_t>(z)];
    h = Mat(1, 1, std::fabs(u) <= delta_ ? 1.0 / delta_ : 0.0);
}

// --- factories ----------------------------------------------------------------

namespace {

Mat random_psd_capped(int d, DetRng& rng) {
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
    Mat h = matmul(transpose(a), a);
    double top = spectral_norm_sym(h);
    if (top > 2.0) h = (2.0 / top) * h;
    return h;
}

Vec random_normal_vec(int d, DetRng& rng) {
    Vec v(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) v[static_cast<size_t>(i)] = rng.normal();
    return v;
}

}  // namespace

Problem make_quadratic(int d, int n, uint64_t seed) {
    if (d < 1 || n < 1) throw ValidationError("quadratic objective needs d >= 1 and N >= 1");
    require_dense_dim(d, "quadratic sample generation");
    std::vector<Mat> h;
    std::vector<Vec> b;
    for (int z = 0; z < n; ++z) {
        DetRng rng(seed, Stream::kObjective, static_cast<uint64_t>(z));
        h.push_back(random_psd_capped(d, rng));
        b.push_back(random_normal_vec(d, rng));
    }
    Problem p;
    p.objective = std::make_shared<QuadraticObjective>(std::move(h), std::move(b));
    p.dataset.n = n;
    return p;
}

Problem make_cubic_perturbed(int d, int n, uint64_t seed, double cubic_scale,
                             double quartic_coeff) {
    if (d < 1 || n < 1) throw ValidationError("cubic objective needs d >= 1 and N >= 1");
    if (quartic_coeff < 0.0) throw ValidationError("quartic coefficient must be >= 0");
    require_dense_dim(d, "cubic sample generation");
    std::vector<Mat> h;
    std::vector<Vec> b, c;
    for (int z = 0; z < n; ++z) {
        DetRng rng(seed, Stream::kObjective, static_cast<uint64_t>(z));
        h.push_back(random_psd_capped(d, rng));
        b.push_back(random_normal_vec(d, rng));
        c.push_back(random_normal_vec(d, rng));
    }
    Problem p;
    p.objective = std::make_shared<CubicPerturbedObjective>(std::move(h), std::move(b), std::move(c),
                                                            cubic_scale, quartic_coeff);
    p.dataset.n = n;
    return p;
}

PlanarDataKind planar_kind_from_string(const std::string& name) {
    if (name == "two_moons") return PlanarDataKind::kTwoMoons;
    if (name == "blobs") return PlanarDataKind::kBlobs;
    throw ValidationError("unknown planar dataset kind: " + name);
}

Problem make_mlp(int hidden, uint64_t seed, PlanarDataKind kind, int n) {
    if (n < 2) throw ValidationError("planar dataset needs N >= 2");
    std::vector<Vec> xs;
    std::vector<int> ys;
    const double pi = 3.14159265358979323846;
    for (int z = 0; z < n; ++z) {
        DetRng rng(seed, Stream::kData, static_cast<uint64_t>(z));
        int cls = z % 2;
        double x0, x1;
        if (kind == PlanarDataKind::kTwoMoons) {
            double t = pi * rng.uniform();
            if (cls == 0) {
                x0 = std::cos(t);
                x1 = std::sin(t);
            } else {
                x0 = 1.0 - std::cos(t);
                x1 = 0.5 - std::sin(t);
            }
            x0 += 0.1 * rng.normal();
            x1 += 0.1 * rng.normal();
        } else {
            double cx = cls == 0 ? -1.5 : 1.5;
            x0 = cx + 0.5 * rng.normal();
            x1 = 0.5 * rng.normal();
        }
        xs.push_back({x0, x1});
        ys.push_back(cls);
    }
    return make_mlp_from_data(hidden, std::move(xs), std::move(ys));
}

Problem make_mlp_from_data(int hidden, std::vector<Vec> features, std::vector<int> labels) {
    Problem p;
    p.dataset.n = static_cast<int>(features.size());
    p.dataset.features = features;
    p.dataset.labels = labels;
    p.objective = std::make_shared<MlpObjective>(hidden, std::move(features), std::move(labels));
    return p;
}

Problem make_huber_kink(int n, uint64_t seed, double delta) {
    if (n < 1) throw ValidationError("kink objective needs N >= 1");
    std::vector<double> centers;
    for (int z = 0; z < n; ++z) {
        DetRng rng(seed, Stream::kObjective, static_cast<uint64_t>(z));
        centers.push_back(0.4 * (rng.uniform() - 0.5));
    }
    Problem p;
    p.objective = std::make_shared<HuberKinkObjective>(std::move(centers), delta);
    p.dataset.n = n;
    return p;
}

CsvData load_csv_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("dataset file is empty: " + path);

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    const size_t ncols = split(line).size();
    if (ncols < 2)
        throw ValidationError("dataset needs at least one feature column and a label column");

    CsvData data;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split(line);
        if (cells.size() != ncols)
            throw ValidationError("dataset line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(ncols) + " columns");
        auto only_trailing_space = [](const std::string& s, size_t pos) {
            while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
            return pos == s.size();
        };
        Vec x;
        for (size_t c = 0; c + 1 < ncols; ++c) {
            size_t pos = 0;
            double v = 0.0;
            bool ok = true;
            try {
                v = std::stod(cells[c], &pos);
            } catch (const std::exception&) {
                ok = false;
            }
            if (!ok || !only_trailing_space(cells[c], pos))
                throw ValidationError("dataset line " + std::to_string(lineno) +
                                      ": non-numeric feature '" + cells[c] + "'");
            x.push_back(v);
        }
        const std::string& lab = cells.back();
        size_t pos = 0;
        int y = 0;
        bool ok = true;
        try {
            y = std::stoi(lab, &pos);
        } catch (const std::exception&) {
            ok = false;
        }
        if (!ok || !only_trailing_space(lab, pos))
            throw ValidationError("dataset line " + std::to_string(lineno) +
                                  ": non-integer label '" + lab + "'");
        data.features.push_back(std::move(x));
        data.labels.push_back(y);
    }
    if (data.features.empty()) throw ValidationError("dataset has no data rows: " + path);
    return data;
}

// --- batch operations -----------------------------------------------------------

namespace {
void require_batch(const Objective& obj, const std::vector<int>& batch) {
    if (batch.empty()) throw ValidationError("batch must be nonempty");
    for (int z : batch)
        if (z < 0 || z >= obj.num_samples())
            throw ValidationError("batch index out of range: " + std::to_string(z));
}
}  // namespace

double batch_loss(const Objective& obj, const Vec& w, const std::vector<int>& batch) {
    require_batch(obj, batch);
    double acc = 0.0;
    for (int z : batch) acc += obj.sample_loss(w, z);
    return acc / static_cast<double>(batch.size());
}

Vec batch_gradient(const Objective& obj, const Vec& w, const std::vector<int>& batch) {
    require_batch(obj, batch);
    Vec acc(w.size(), 0.0);
    Vec g;
    for (int z : batch) {
        obj.sample_grad(w, z, g);
        axpy(1.0, g, acc);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (double& v : acc) v *= inv;
    return acc;
}

Mat batch_hessian(const Objective& obj, const Vec& w, const std::vector<int>& batch) {
    require_batch(obj, batch);
    const int d = obj.dim();
    require_dense_dim(d, "dense Hessian");
    if (obj.has_analytic_hessian()) {
        Mat acc(d, d);
        Mat h;
        for (int z : batch) {
            obj.sample_hessian(w, z, h);
            for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += h.a[i];
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (double& v : acc.a) v *= inv;
        return acc;
    }
    const double h = 1e-4 * (1.0 + norm_inf(w));
    Mat m(d, d);
    Vec wp = w, wm = w;
    for (int i = 0; i < d; ++i) {
        wp[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] + h;
        wm[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] - h;
        Vec gp = batch_gradient(obj, wp, batch);
        Vec gm = batch_gradient(obj, wm, batch);
        for (int r = 0; r < d; ++r)
            m(r, i) = (gp[static_cast<size_t>(r)] - gm[static_cast<size_t>(r)]) / (2.0 * h);
        wp[static_cast<size_t>(i)] = w[static_cast<size_t>(i)];
        wm[static_cast<size_t>(i)] = w[static_cast<size_t>(i)];
    }
    Mat sym(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) sym(i, j) = 0.5 * (m(i, j) + m(j, i));
    return sym;
}

Vec third_order_contract(const Objective& obj, const Vec& w, const std::vector<int>& batch,
                         const Mat& m) {
    require_batch(obj, batch);
    const int d = obj.dim();
    require_dense_dim(d, "third-derivative contraction");
    if (m.rows != d || m.cols != d)
        throw ValidationError("third-derivative contraction: matrix shape mismatch");
    if (max_asymmetry(m) > 1e-12)
        throw ValidationError("third-derivative contraction requires a symmetric matrix");

    const double h = 1e-3;
    Vec out(static_cast<size_t>(d), 0.0);
    Vec wp = w, wm = w;
    for (int i = 0; i < d; ++i) {
        wp[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] + h;
        wm[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] - h;
        Mat hp = batch_hessian(obj, wp, batch);
        Mat hm = batch_hessian(obj, wm, batch);
        double acc = 0.0;
        for (int l = 0; l < d; ++l)
            for (int s = 0; s < d; ++s)
                acc += (hp(l, s) - hm(l, s)) / (2.0 * h) * m(l, s);
        out[static_cast<size_t>(i)] = acc;
        wp[static_cast<size_t>(i)] = w[static_cast<size_t>(i)];
        wm[static_cast<size_t>(i)] = w[static_cast<size_t>(i)];
    }
    return out;
}

}  // namespace clab::objectives
