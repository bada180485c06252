#include "bvs/model_space.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bvs/error.hpp"

namespace bvs {

namespace {

constexpr const char* kModule = "core_model_space";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

std::string describe(const ModelIndicator& m) {
    return fmt::format("k={} gamma=0x{}", m.k(), m.to_hex());
}

}  // namespace

std::string_view to_string(RankClass c) noexcept {
    switch (c) {
        case RankClass::Regular: return "regular";
        case RankClass::Saturated: return "saturated";
        case RankClass::Singular: return "singular";
    }
    return "unknown";
}

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X, int k0, std::vector<std::string> covariate_names) {
    if (k0 != 0 && k0 != 1) throw Error(ErrorKind::Validation, kModule, "k0 must be 0 or 1");
    if (y.size() < 2) throw Error(ErrorKind::Validation, kModule, "at least two observations are required");
    if (X.cols() < 1) throw Error(ErrorKind::Validation, kModule, "at least one candidate covariate is required");
    if (X.rows() != y.size())
        throw Error(ErrorKind::Validation, kModule,
                    fmt::format("design has {} rows but the response has {}", X.rows(), y.size()));
    if (!y.allFinite()) throw Error(ErrorKind::Validation, kModule, "response contains non-finite values");
    if (!X.allFinite()) throw Error(ErrorKind::Validation, kModule, "design contains non-finite values");

    if (covariate_names.empty()) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) covariate_names.push_back(fmt::format("x{}", j + 1));
    } else if (covariate_names.size() != static_cast<std::size_t>(X.cols())) {
        throw Error(ErrorKind::Validation, kModule, "covariate name count does not match the design");
    }

    if (k0 == 1) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const auto col = X.col(j);
            if ((col.array() == col(0)).all())
                throw Error(ErrorKind::Validation, kModule,
                            fmt::format("column '{}' is constant and collinear with the intercept",
                                        covariate_names[static_cast<std::size_t>(j)]));
        }
    }

    Dataset d;
    d.y = std::move(y);
    d.X = std::move(X);
    d.k0 = k0;
    d.covariate_names = std::move(covariate_names);
    return d;
}

Dataset head_rows(const Dataset& d, std::size_t n_rows) {
    if (n_rows > d.n()) throw Error(ErrorKind::Validation, kModule, "requested more rows than the dataset has");
    const auto rows = static_cast<Eigen::Index>(n_rows);
    auto out = make_dataset(d.y.head(rows), d.X.topRows(rows), d.k0, d.covariate_names);
    out.response_name = d.response_name;
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, const ResponseColumn& response, bool intercept) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, kModule, fmt::format("cannot open '{}'", path.string()));

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Parse, kModule, "missing header row");
    std::vector<std::string> header;
    for (auto cell : split_commas(line)) header.emplace_back(cell);

    std::size_t response_idx = header.size();
    if (const auto* idx = std::get_if<std::size_t>(&response)) {
        response_idx = *idx;
    } else {
        const auto& name = std::get<std::string>(response);
        const auto it = std::find(header.begin(), header.end(), name);
        if (it != header.end()) response_idx = static_cast<std::size_t>(it - header.begin());
    }
    if (response_idx >= header.size())
        throw Error(ErrorKind::Parse, kModule, "response column not found in header");
    if (header.size() < 2) throw Error(ErrorKind::Parse, kModule, "no covariate columns");

    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != header.size())
            throw Error(ErrorKind::Parse, kModule,
                        fmt::format("row {} has {} cells, expected {}", row_no, cells.size(), header.size()));
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto cell = cells[c];
            double v = 0.0;
            const auto* first = cell.data();
            const auto* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
                throw Error(ErrorKind::Parse, kModule,
                            fmt::format("row {} column '{}': '{}' is not a finite number", row_no, header[c], cell));
            values[c] = v;
        }
        rows.push_back(std::move(values));
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(header.size() - 1);
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, p);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != response_idx) names.push_back(header[c]);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        Eigen::Index col = 0;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c == response_idx)
                y(i) = r[c];
            else
                X(i, col++) = r[c];
        }
    }
    auto d = make_dataset(std::move(y), std::move(X), intercept ? 1 : 0, std::move(names));
    d.response_name = header[response_idx];
    return d;
}

CenteredDesign center_design(const Dataset& d) {
    CenteredDesign cd;
    cd.k0 = d.k0;
    const auto p = d.X.cols();
    if (d.k0 == 1) {
        cd.column_means = d.X.colwise().mean().transpose();
        cd.V = d.X.rowwise() - cd.column_means.transpose();
    } else {
        cd.column_means = Eigen::VectorXd::Zero(p);
        cd.V = d.X;
    }
    cd.column_scales.resize(p);
    const double denom = std::max<double>(1.0, static_cast<double>(d.n() - static_cast<std::size_t>(d.k0)));
    for (Eigen::Index j = 0; j < p; ++j) cd.column_scales(j) = std::sqrt(cd.V.col(j).squaredNorm() / denom);
    return cd;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& V, const ModelIndicator& m) {
    const auto idx = m.indices();
    Eigen::MatrixXd out(V.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = V.col(static_cast<Eigen::Index>(idx[c]));
    return out;
}

namespace {

double rank_tolerance(const Eigen::MatrixXd& A) {
    double max_norm = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) max_norm = std::max(max_norm, A.col(j).norm());
    return static_cast<double>(A.rows()) * std::numeric_limits<double>::epsilon() * max_norm;
}

std::size_t rank_from_qr(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr, double tol) {
    const auto diag = std::min(qr.matrixQR().rows(), qr.matrixQR().cols());
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < diag; ++i)
        if (std::abs(qr.matrixQR()(i, i)) > tol) ++r;
    return r;
}

}  // namespace

std::size_t numerical_rank(const Eigen::MatrixXd& A) {
    if (A.cols() == 0 || A.rows() == 0) return 0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    return rank_from_qr(qr, rank_tolerance(A));
}

std::size_t rank_of_v(const CenteredDesign& cd, const ModelIndicator& m, int k0) {
    const auto n = static_cast<std::size_t>(cd.V.rows());
    const std::size_t rank = numerical_rank(select_columns(cd.V, m));
    const std::size_t expected = std::min(m.k(), n - static_cast<std::size_t>(k0));
    if (rank != expected)
        throw Error(ErrorKind::RankDeficiency, kModule,
                    fmt::format("model {} has rank(V) = {} but the design assumptions require {}", describe(m), rank,
                                expected));
    return rank;
}

double null_sse(const Dataset& d) {
    if (d.k0 == 1) return (d.y.array() - d.y.mean()).matrix().squaredNorm();
    return d.y.squaredNorm();
}

namespace {

// Singular/saturated models get sse = 0 exactly; the rank check on them is
// optional because the Gibbs hot path never reaches it.
ModelStats compute_stats(const CenteredDesign& cd, const Eigen::VectorXd& yc, double sse0, std::size_t n, int k0,
                         const ModelIndicator& m, bool check_nonregular_rank) {
    ModelStats s;
    s.k = m.k();
    s.rank_class = classify(m, n, k0);
    if (s.rank_class != RankClass::Regular) {
        s.rank_v = check_nonregular_rank ? rank_of_v(cd, m, k0) : n - static_cast<std::size_t>(k0);
        return s;
    }
    if (m.k() == 0) {
        s.sse = sse0;
        s.q_ratio = 1.0;
        return s;
    }
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Vg);
    const std::size_t rank = rank_from_qr(qr, rank_tolerance(Vg));
    if (rank != m.k())
        throw Error(ErrorKind::RankDeficiency, kModule,
                    fmt::format("model {} has rank(V) = {} but the design assumptions require {}", describe(m), rank,
                                m.k()));
    const Eigen::VectorXd qty = qr.householderQ().adjoint() * yc;
    s.rank_v = rank;
    s.sse = qty.tail(qty.size() - static_cast<Eigen::Index>(m.k())).squaredNorm();
    s.q_ratio = s.sse / sse0;
    return s;
}

Eigen::VectorXd net_of_intercept(const Dataset& d) {
    return d.k0 == 1 ? Eigen::VectorXd(d.y.array() - d.y.mean()) : d.y;
}

}  // namespace

ModelStats model_stats(const Dataset& d, const CenteredDesign& cd, const ModelIndicator& m) {
    const double sse0 = null_sse(d);
    if (!(sse0 > 0.0))
        throw Error(ErrorKind::DegenerateResponse, kModule, "null-model SSE is zero; the response is degenerate");
    return compute_stats(cd, net_of_intercept(d), sse0, d.n(), d.k0, m, true);
}

FullRankFactors full_rank_factorize(const CenteredDesign& cd, const ModelIndicator& m) {
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    const std::size_t r = rank_of_v(cd, m, cd.k0);
    const auto rows = Vg.rows();
    const auto ri = static_cast<Eigen::Index>(r);
    FullRankFactors f;
    if (r == m.k()) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Vg);
        f.L = qr.householderQ() * Eigen::MatrixXd::Identity(rows, ri);
        f.R = qr.matrixQR().topRows(ri).triangularView<Eigen::Upper>();
        return f;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Vg);
    f.L = qr.householderQ() * Eigen::MatrixXd::Identity(rows, ri);
    const Eigen::MatrixXd top = qr.matrixQR().topRows(ri).triangularView<Eigen::Upper>();
    f.R = top * qr.colsPermutation().transpose();
    return f;
}

RegressionProblem::RegressionProblem(Dataset d) : data_(std::move(d)) {
    design_ = center_design(data_);
    sse_null_ = null_sse(data_);
    if (!(sse_null_ > 0.0))
        throw Error(ErrorKind::DegenerateResponse, kModule, "null-model SSE is zero; the response is degenerate");
    yc_ = net_of_intercept(data_);
}

ModelStats RegressionProblem::stats(const ModelIndicator& m) const {
    return compute_stats(design_, yc_, sse_null_, n(), k0(), m, false);
}

}  // namespace bvs
