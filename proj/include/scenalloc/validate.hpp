#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scenalloc/market_data.hpp"

namespace scenalloc::validate {

struct ValidationReport {
    std::vector<std::string> variable_names;
    Eigen::VectorXd ks_scores;       // per variable, in [0, 1]
    Eigen::MatrixXd corr_similarity;  // NaN where undefined (zero-variance column)
    double mean_ks = 0.0;
    double min_corr_sim = 1.0;  // over defined entries
};

// 1 - sup |F_orig - F_synth| over the merged sample points (exact, unbinned).
double ks_complement(const Eigen::VectorXd& original, const Eigen::VectorXd& synthetic);

// Entry (i,j) = 1 - |rho_orig(i,j) - rho_synth(i,j)| with Pearson rho;
// diagonal = 1; entries touching a zero-variance column are NaN.
// rows = samples, cols = variables.
Eigen::MatrixXd correlation_similarity(const Eigen::MatrixXd& original,
                                       const Eigen::MatrixXd& synthetic);

ValidationReport validation_report(const market::ScenarioTable& original,
                                   const market::ScenarioTable& synthetic);

// report.json, ks.csv, corr_similarity.csv plus long-format pair-plot data
// (within-group pairs, deterministically downsampled).
void write_validation_artifacts(const ValidationReport& report,
                                const market::ScenarioTable& original,
                                const market::ScenarioTable& synthetic, const std::string& out_dir,
                                const std::vector<std::string>& comments);

}  // namespace scenalloc::validate
