#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wser/labels.hpp"
#include "wser/wavelet.hpp"

namespace wser {

struct Recording {
    std::string id;  // file stem
    VectorXd samples;  // mono, in [-1, 1]
    int sample_rate = 0;
    Emotion label = Emotion::neutral;
};

struct WavData {
    VectorXd samples;
    int sample_rate = 0;
    int channels = 0;
};

/// Reads RIFF/WAVE PCM 16-bit little-endian, mono or stereo. Stereo frames
/// are averaged; samples are scaled by 1/32768. Chunks other than `fmt ` and
/// `data` are skipped.
WavData read_wav(const std::filesystem::path& path);

/// Writes mono 16-bit PCM. Samples are clamped to [-1, 1) and rounded to the
/// nearest step of 1/32768.
void write_wav(const std::filesystem::path& path, const VectorXd& samples, int sample_rate);

struct ManifestEntry {
    std::string path;  // relative to the manifest root
    Emotion label = Emotion::neutral;
};

/// Text format: a header `rate=<Hz>`, then `<relative-path>\t<label>` lines.
struct CorpusManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
    int expected_sample_rate = 0;
};

/// Parses a manifest file. Relative paths resolve against the directory
/// holding the manifest.
CorpusManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);

/// One Recording per manifest entry, in manifest order. Files are read in
/// parallel; rate mismatches are collected and reported together.
std::vector<Recording> load_corpus(const CorpusManifest& manifest, unsigned threads = 0);

/// Builds a manifest for an Emo-DB style directory: the sixth character of
/// each file name codes the emotion (W anger, L boredom, E disgust, A anxiety,
/// F happiness, T sadness, N neutral). Files are sorted by name.
CorpusManifest emodb_manifest(const std::filesystem::path& wav_dir, int sample_rate = 16000);

/// Deterministic seven-class synthetic corpus.
///
/// Each recording is band-limited noise built in the db6 wavelet domain:
/// independent Gaussian detail coefficients at every octave (plus a coarse
/// approximation band), scaled by class-specific gains, inverse transformed,
/// then amplitude-modulated with a class-specific depth and rate. Gains carry
/// a small per-recording jitter. Labels cycle in canonical order so that
/// recording i has label i mod 7.
std::vector<Recording> synth_corpus(std::uint64_t seed, int per_class, int length,
                                    int sample_rate = 16000);

/// The signature table behind synth_corpus; exposed for tests.
struct SynthSignature {
    std::vector<double> octave_gains;  // detail levels 1..10, then A10
    double modulation_depth = 0;
    double modulation_hz = 0;
};
const SynthSignature& synth_signature(Emotion e);

}  // namespace wser
