#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "clab/linalg.hpp"

namespace clab::objectives {

// Sample container plus worker shard assignment. Analytic families keep
// their per-sample coefficients inside the objective; data-driven families
// (network, CSV) expose raw features here as well.
struct Dataset {
    int n = 0;
    std::vector<Vec> features;
    std::vector<int> labels;
    std::vector<std::vector<int>> shards;

    // Contiguous blocks with sizes within one of n/m. Requires n >= m.
    void shard_uniform(int m);
    std::vector<int> all_indices() const;
};

struct Batch {
    int worker = 0;
    std::vector<int> indices;
};

// Mean empirical loss over N samples; every op that touches a batch runs in
// ascending batch-index order so results are bitwise reproducible.
class Objective {
  public:
    virtual ~Objective() = default;

    int dim() const { return d_; }
    int num_samples() const { return n_; }
    bool has_analytic_hessian() const { return analytic_hessian_; }

    virtual double sample_loss(const Vec& w, int z) const = 0;
    virtual void sample_grad(const Vec& w, int z, Vec& g) const = 0;
    virtual void sample_hessian(const Vec& w, int z, Mat& h) const;

    // Parameter index groups used for filter-normalized landscape
    // directions; empty means plain unit directions.
    virtual std::vector<std::vector<int>> filter_groups() const { return {}; }

  protected:
    int d_ = 0;
    int n_ = 0;
    bool analytic_hessian_ = false;
};

struct Problem {
    std::shared_ptr<Objective> objective;
    Dataset dataset;
};

// --- concrete families -----------------------------------------------------

// Per-sample L(w; z) = 0.5 w^T H_z w + b_z^T w with H_z symmetric PSD.
class QuadraticObjective : public Objective {
  public:
    QuadraticObjective(std::vector<Mat> h, std::vector<Vec> b);
    double sample_loss(const Vec& w, int z) const override;
    void sample_grad(const Vec& w, int z, Vec& g) const override;
    void sample_hessian(const Vec& w, int z, Mat& h) const override;
    const Mat& h(int z) const { return h_[static_cast<size_t>(z)]; }
    const Vec& b(int z) const { return b_[static_cast<size_t>(z)]; }

  private:
    std::vector<Mat> h_;
    std::vector<Vec> b_;
};

// Quadratic core plus a per-sample diagonal cubic term and an isotropic
// quartic confinement: L = 0.5 w^T H_z w + b_z^T w
//                        + cubic_scale * sum_i c_{z,i} w_i^3
//                        + quartic_coeff * ||w||^4.
// The third derivative of the cubic part is constant and diagonal, and the
// whole loss is an exact degree-4 polynomial, so Taylor expansions in the
// verification harness terminate exactly.
class CubicPerturbedObjective : public Objective {
  public:
    CubicPerturbedObjective(std::vector<Mat> h, std::vector<Vec> b, std::vector<Vec> c,
                            double cubic_scale, double quartic_coeff);
    double sample_loss(const Vec& w, int z) const override;
    void sample_grad(const Vec& w, int z, Vec& g) const override;
    void sample_hessian(const Vec& w, int z, Mat& h) const override;
    double cubic_scale() const { return cubic_scale_; }
    double quartic_coeff() const { return quartic_coeff_; }

  private:
    std::vector<Mat> h_;
    std::vector<Vec> b_;
    std::vector<Vec> c_;
    double cubic_scale_;
    double quartic_coeff_;
};

// One-hidden-layer tanh network with logistic loss on 2-class data,
// gradients by manual backpropagation. Parameter packing order:
// W1 row-major (hidden x input), b1, w2, b2.
class MlpObjective : public Objective {
  public:
    MlpObjective(int hidden, std::vector<Vec> features, std::vector<int> labels);
    double sample_loss(const Vec& w, int z) const override;
    void sample_grad(const Vec& w, int z, Vec& g) const override;
    std::vector<std::vector<int>> filter_groups() const override;
    int hidden() const { return hidden_; }
    int input_dim() const { return input_dim_; }

  private:
    double logit(const Vec& w, int z, Vec& act) const;
    int hidden_;
    int input_dim_;
    std::vector<Vec> features_;
    std::vector<int> labels_;
};

// 1D Huber-smoothed kink |w - c_z|: quadratic within +-delta of the center,
// affine outside. Loss is 1-Lipschitz, its gradient (1/delta)-Lipschitz,
// which is the testbed regime for the smoothed-gradient bound.
class HuberKinkObjective : public Objective {
  public:
    HuberKinkObjective(std::vector<double> centers, double delta);
    double sample_loss(const Vec& w, int z) const override;
    void sample_grad(const Vec& w, int z, Vec& g) const override;
    void sample_hessian(const Vec& w, int z, Mat& h) const override;
    double delta() const { return delta_; }

  private:
    std::vector<double> centers_;
    double delta_;
};

// --- factories ---------------------------------------------------------------

// Random PSD quadratics H_z = A^T A (standard normal A) rescaled to spectral
// norm <= 2, plus standard normal b_z.
Problem make_quadratic(int d, int n, uint64_t seed);

Problem make_cubic_perturbed(int d, int n, uint64_t seed, double cubic_scale,
                             double quartic_coeff = 0.01);

enum class PlanarDataKind { kTwoMoons, kBlobs };
PlanarDataKind planar_kind_from_string(const std::string& name);

Problem make_mlp(int hidden, uint64_t seed, PlanarDataKind kind, int n);

// Network objective over externally supplied features/labels (CSV path).
Problem make_mlp_from_data(int hidden, std::vector<Vec> features, std::vector<int> labels);

Problem make_huber_kink(int n, uint64_t seed, double delta);

// CSV with a header row, float feature columns, and a final integer label
// column. Malformed rows or an empty table raise ValidationError.
struct CsvData {
    std::vector<Vec> features;
    std::vector<int> labels;
};
CsvData load_csv_dataset(const std::string& path);

// --- batch operations --------------------------------------------------------

double batch_loss(const Objective& obj, const Vec& w, const std::vector<int>& batch);
Vec batch_gradient(const Objective& obj, const Vec& w, const std::vector<int>& batch);

// Mean per-sample Hessian when analytic, otherwise central finite
// differences of batch_gradient at h = 1e-4 * (1 + ||w||_inf) with explicit
// (M + M^T)/2 symmetrization. Dense path requires d <= 200.
Mat batch_hessian(const Objective& obj, const Vec& w, const std::vector<int>& batch);

// out_i = sum_{l,s} (d H_{ls} / d w_i) * M_{ls}, the third-derivative tensor
// contracted against a symmetric matrix, via central differences of
// batch_hessian at step 1e-3. Dense path requires d <= 200.
Vec third_order_contract(const Objective& obj, const Vec& w, const std::vector<int>& batch,
                         const Mat& m);

inline constexpr int kDenseDimLimit = 200;

}  // namespace clab::objectives
