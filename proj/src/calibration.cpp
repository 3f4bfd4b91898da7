// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include "ledcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "ledcal/error.hpp"

namespace ledcal {

namespace {

// Relative singular-value cutoff when counting independent predicted colors.
// Directions weaker than this (float32 capture noise on a spectrally flat
// chart, say) are treated as absent; it also caps cond(A) of the normal
// equations at 1e12.
constexpr double kRankTolerance = 1e-6;

void check_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("beta must be positive and finite");
}

void check_weights(const ChartWeights& weights) {
    bool any = false;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw InputError("patch weights must be finite and non-negative");
        any = any || w > 0.0;
    }
    if (!any) throw InputError("at least one patch weight must be positive");
}

}  // namespace

Mat3 build_SL(const Vec3& red, const Vec3& green, const Vec3& blue) {
    for (const Vec3* v : {&red, &green, &blue}) {
        for (double c : *v) {
            if (!std::isfinite(c) || c < 0.0) throw InputError("primary readings must be finite and non-negative");
        }
    }
    return Mat3::from_columns(red, green, blue);
}

Mat3 solve_M(const Mat3& SL, double cond_limit) {
    if (!SL.is_finite()) throw InputError("SL has non-finite entries");
    const double cond = SL.condition_number();
    if (!(cond <= cond_limit)) {
        std::ostringstream os;
        os << "primary matrix SL is ill-conditioned (condition number " << cond << " > " << cond_limit << ")";
        throw SolverError(os.str());
    }
    return SL.inverse();
}

SRLSet build_SRL(const ChartSamples& red_lit, const ChartSamples& green_lit, const ChartSamples& blue_lit) {
    if (red_lit.white_index() != green_lit.white_index() || red_lit.white_index() != blue_lit.white_index()) {
        throw InputError("per-channel charts disagree on the white patch index");
    }
    SRLSet srl;
    srl.white_index = red_lit.white_index();
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        srl.patches[j] = Mat3::from_columns(red_lit[j], green_lit[j], blue_lit[j]);
    }
    return srl;
}

std::array<Vec3, kChartPatches> predict_lit_patches(const SRLSet& srl, const Mat3& M, const Vec3& w_avg,
                                                    double beta) {
    check_beta(beta);
    const Vec3 drive = M * w_avg;
    std::array<Vec3, kChartPatches> out{};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const Vec3 raw = srl.patches[j] * drive;
        out[j] = {raw[0] / beta, raw[1] / beta, raw[2] / beta};
    }
    return out;
}

SimulatedChart simulate_lit_chart(const SRLSet& srl, const Mat3& M, const Vec3& w_avg, double beta) {
    auto patches = predict_lit_patches(srl, M, w_avg, beta);
    std::size_t clamped = 0;
    for (Vec3& p : patches) {
        for (double& c : p) {
            if (c < 0.0) {
                c = 0.0;
                ++clamped;
            }
        }
    }
    return {ChartSamples(patches, srl.white_index), clamped};
}

double q_objective(const Mat3& Q, const std::array<Vec3, kChartPatches>& predicted, const ChartSamples& targets,
                   const ChartWeights& weights) {
    double total = 0.0;
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const Vec3 e = Q * predicted[j] - targets[j];
        total += weights[j] * dot(e, e);
    }
    return total;
}

QSolution fit_Q(const std::array<Vec3, kChartPatches>& predicted, const ChartSamples& targets,
                const ChartWeights& weights) {
    check_weights(weights);
    Eigen::Matrix<double, kChartPatches, 3> X;
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const double s = std::sqrt(weights[j]);
        for (int c = 0; c < 3; ++c) X(static_cast<Eigen::Index>(j), c) = s * predicted[j][c];
    }
    if (!X.allFinite()) throw InputError("predicted chart colors are not finite");
    const Eigen::JacobiSVD<Eigen::Matrix<double, kChartPatches, 3>> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0) throw SolverError("degenerate lighting: every weighted predicted patch is zero");
    int rank = 0;
    for (int k = 0; k < 3; ++k) rank += sv(k) > kRankTolerance * sv(0) ? 1 : 0;

    QSolution sol;
    sol.rank = rank;
    if (rank == 3) {
        Mat3 A;
        std::array<Vec3, 3> rhs{};
        for (std::size_t j = 0; j < kChartPatches; ++j) {
            const double w = weights[j];
            if (w == 0.0) continue;
            const Vec3& x = predicted[j];
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) A(r, c) += w * x[r] * x[c];
                for (int i = 0; i < 3; ++i) rhs[i][r] += w * targets[j][i] * x[r];
            }
        }
        sol.Q = Mat3::from_rows(A.solve(rhs[0]), A.solve(rhs[1]), A.solve(rhs[2]));
    } else {
        // Q = I + D with D the minimum-norm least-squares correction: the
        // minimizer nearest the identity.
        const auto& U = svd.matrixU();
        const auto& V = svd.matrixV();
        for (int i = 0; i < 3; ++i) {
            Eigen::Matrix<double, kChartPatches, 1> t;
            for (std::size_t j = 0; j < kChartPatches; ++j) {
                t(static_cast<Eigen::Index>(j)) = std::sqrt(weights[j]) * (targets[j][i] - predicted[j][i]);
            }
            Eigen::Vector3d d = Eigen::Vector3d::Zero();
            for (int k = 0; k < rank; ++k) d += (U.col(k).dot(t) / sv(k)) * V.col(k);
            for (int c = 0; c < 3; ++c) sol.Q(i, c) = (i == c ? 1.0 : 0.0) + d(c);
        }
    }
    sol.residual = q_objective(sol.Q, predicted, targets, weights);
    return sol;
}

QSolution solve_Q(const SRLSet& srl, const Mat3& M, const Vec3& w_avg, const ChartSamples& targets, double beta,
                  const ChartWeights& weights) {
    return fit_Q(predict_lit_patches(srl, M, w_avg, beta), targets, weights);
}

std::optional<Mat3> solve_N(const Mat3& M, const Mat3& Q, double cond_limit) {
    if (!M.is_finite() || !Q.is_finite()) return std::nullopt;
    const double cond = Q.condition_number();
    if (!(cond <= cond_limit)) return std::nullopt;
    return M * Q.inverse();
}

BlackLevel compute_black_level(const Vec3& b_camera, const Vec3& w_camera) {
    BlackLevel out;
    for (int c = 0; c < 3; ++c) {
        if (!(w_camera[c] > 0.0)) throw InputError("white reading w_camera must be positive in every channel");
        if (!(b_camera[c] >= 0.0)) throw InputError("black reading b_camera must be non-negative");
        out.offset[c] = b_camera[c] / w_camera[c];
        out.suspicious = out.suspicious || out.offset[c] > 0.2;
    }
    return out;
}

Vec3 transform_content(const Vec3& pixel, ContentMode mode, const CalibrationBundle& bundle, GamutCounter* gamut) {
    switch (mode) {
        case ContentMode::out_of_frustum:
            return bundle.M * pixel;
        case ContentMode::post:
            return bundle.Q * pixel;
        case ContentMode::in_frustum: {
            const Vec3 drive = bundle.in_frustum_matrix() * pixel;
            bool out_of_gamut = false;
            Vec3 out{};
            for (int c = 0; c < 3; ++c) {
                const double v = drive[c] - bundle.black_offset[c];
                out_of_gamut = out_of_gamut || drive[c] < 0.0 || v > 1.0;
                out[c] = std::clamp(v, 0.0, 1.0);
            }
            if (gamut != nullptr) {
                ++gamut->pixels;
                if (out_of_gamut) ++gamut->out_of_gamut;
            }
            return out;
        }
    }
    return pixel;
}

Vec3 chart_error(const ChartSamples& target, const ChartSamples& measured) {
    const Vec3& white = target.white();
    for (double c : white) {
        if (!(c > 0.0)) throw InputError("target white patch must be positive in every channel");
    }
    Vec3 err{0, 0, 0};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        for (int c = 0; c < 3; ++c) err[c] += std::fabs(measured[j][c] - target[j][c]) / white[c];
    }
    return (1.0 / static_cast<double>(kChartPatches)) * err;
}

ChartSamples apply_matrix(const Mat3& A, const ChartSamples& chart, std::size_t* clamped) {
    std::array<Vec3, kChartPatches> out{};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        out[j] = A * chart[j];
        for (double& c : out[j]) {
            if (c < 0.0) {
                c = 0.0;
                if (clamped != nullptr) ++*clamped;
            }
        }
    }
    return ChartSamples(out, chart.white_index());
}

}  // namespace ledcal
