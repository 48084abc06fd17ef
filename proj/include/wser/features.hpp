#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wser/audio.hpp"
#include "wser/labels.hpp"
#include "wser/stats.hpp"
#include "wser/wavelet.hpp"

namespace wser {

/// Named features for one recording. Names follow `<wavelet>.<subband>.<stat>`,
/// e.g. `db6.D3.kurtosis`.
struct FeatureVector {
    std::vector<std::string> names;
    VectorXd values;
    /// Subbands (`<wavelet>.<subband>`) whose variance was zero, so their
    /// kurtosis and skewness were set to 0.
    std::vector<std::string> degenerate;
};

/// A corpus worth of feature vectors; one row per recording.
struct FeatureMatrix {
    std::vector<std::string> ids;
    std::vector<Emotion> labels;
    std::vector<std::string> feature_names;
    Eigen::MatrixXd values;  // rows x features

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    /// Column index of a feature name, or -1.
    Eigen::Index column(const std::string& name) const;

    /// Subset of rows, in the order given.
    FeatureMatrix select_rows(const std::vector<Eigen::Index>& rows) const;

    /// Throws DataError unless every label has at least `minimum` rows.
    void require_rows_per_label(int minimum, const std::string& context) const;
};

std::string feature_name(const std::string& wavelet, const std::string& subband, std::string_view stat);

/// Decomposes with each wavelet to `levels` and computes the eight statistics
/// on every subband: |wavelets| x (levels + 1) x 8 features.
FeatureVector extract_recording(const Recording& rec, const std::vector<WaveletSpec<double>>& wavelets,
                                int levels);

/// One row per recording in corpus order. Recordings are processed in
/// parallel; any failure aborts with the recording id.
FeatureMatrix extract_corpus(const std::vector<Recording>& corpus,
                             const std::vector<WaveletSpec<double>>& wavelets, int levels,
                             unsigned threads = 0);

/// CSV with header `id,label,<feature names...>`; values use 17 significant
/// digits so a reload is exact.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace wser
