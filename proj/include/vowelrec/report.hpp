#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vowelrec/eval.hpp"
#include "vowelrec/fratio.hpp"
#include "vowelrec/frontend.hpp"

namespace vowelrec {

// CSV renderers. Output is a pure function of the input so identical runs
// give byte-identical files.

/// `clip_id,label,frame_idx,c1..cL`, 17 significant digits.
std::string features_csv(const std::vector<FeatureSequence>& sequences);

/// `coefficient,f_ratio,rank` with 1-based coefficient and rank.
std::string fratio_csv(const FRatioReport& report);

/// One line naming the top-k coefficients, e.g. "top-8 coefficients: 3 1 ...".
std::string subset_summary(const FRatioReport& report, std::size_t k);

/// `k,mean_accuracy,std_accuracy,n_iterations`.
std::string sweep_csv(const SweepReport& report);

/// `k,iteration,accuracy,subset` with the subset as space-separated indices.
std::string sweep_iterations_csv(const SweepReport& report);

/// `k,actual,predicted,count`, summed over iterations.
std::string confusion_csv(const SweepReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace vowelrec
