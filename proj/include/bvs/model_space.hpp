#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "bvs/model_indicator.hpp"

namespace bvs {

enum class RankClass { Regular, Saturated, Singular };

std::string_view to_string(RankClass c) noexcept;

/// Response y, candidate regressors X (n x p) and the intercept flag k0.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    int k0 = 1;
    std::string response_name = "y";
    std::vector<std::string> covariate_names;

    std::size_t n() const noexcept { return static_cast<std::size_t>(y.size()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(X.cols()); }
};

/// Builds a dataset and checks its invariants: n >= 2, p >= 1, finite
/// entries, k0 in {0,1}, and no constant column when k0 = 1.
Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X, int k0,
                     std::vector<std::string> covariate_names = {});

/// Keeps rows [0, n_rows) of a dataset; used to replay an experiment with fewer observations.
Dataset head_rows(const Dataset& d, std::size_t n_rows);

struct CenteredDesign {
    Eigen::MatrixXd V;
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_scales;  // reporting only; V is never rescaled
    int k0 = 1;
};

struct ModelStats {
    std::size_t k = 0;
    double sse = 0.0;
    double q_ratio = 0.0;
    RankClass rank_class = RankClass::Regular;
    std::size_t rank_v = 0;
};

/// V_gamma = L * R with L (n x r) of full column rank and R (r x k) of full row rank.
struct FullRankFactors {
    Eigen::MatrixXd L;
    Eigen::MatrixXd R;
};

/// Zero-based column index or header name.
using ResponseColumn = std::variant<std::size_t, std::string>;

Dataset load_dataset(const std::filesystem::path& path, const ResponseColumn& response, bool intercept);

CenteredDesign center_design(const Dataset& d);

constexpr RankClass classify(std::size_t k, std::size_t n, int k0) noexcept {
    const std::size_t dim = k + static_cast<std::size_t>(k0);
    if (dim < n) return RankClass::Regular;
    if (dim == n) return RankClass::Saturated;
    return RankClass::Singular;
}

inline RankClass classify(const ModelIndicator& m, std::size_t n, int k0) noexcept {
    return classify(m.k(), n, k0);
}

/// Columns of `V` selected by `m`, in covariate order.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& V, const ModelIndicator& m);

/// Numerical rank by column-pivoted QR with tolerance n * eps * (largest column norm).
std::size_t numerical_rank(const Eigen::MatrixXd& A);

/// Rank of V_gamma. Throws a rank-deficiency error when it differs from min(k, n - k0).
std::size_t rank_of_v(const CenteredDesign& cd, const ModelIndicator& m, int k0);

/// Residual sum of squares of the null model: ||y - ybar||^2 or ||y||^2.
double null_sse(const Dataset& d);

ModelStats model_stats(const Dataset& d, const CenteredDesign& cd, const ModelIndicator& m);

FullRankFactors full_rank_factorize(const CenteredDesign& cd, const ModelIndicator& m);

/// Dataset plus everything derived from it once: the centered design, the
/// response net of the intercept, and SSE_0. Read-only after construction.
class RegressionProblem {
public:
    explicit RegressionProblem(Dataset d);

    const Dataset& data() const noexcept { return data_; }
    const CenteredDesign& design() const noexcept { return design_; }
    const Eigen::VectorXd& centered_response() const noexcept { return yc_; }
    double sse_null() const noexcept { return sse_null_; }

    std::size_t n() const noexcept { return data_.n(); }
    std::size_t p() const noexcept { return data_.p(); }
    int k0() const noexcept { return data_.k0; }

    ModelStats stats(const ModelIndicator& m) const;

private:
    Dataset data_;
    CenteredDesign design_;
    Eigen::VectorXd yc_;
    double sse_null_ = 0.0;
};

}  // namespace bvs
