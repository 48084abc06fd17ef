#include "wser/audio.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "wser/error.hpp"
#include "wser/random.hpp"

namespace wser {

namespace {

std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | (p[1] << 8)); }

std::uint32_t le32(const unsigned char* p)
{
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

void put16(std::ostream& os, std::uint16_t v)
{
    const char b[2] = {char(v & 0xff), char(v >> 8)};
    os.write(b, 2);
}

void put32(std::ostream& os, std::uint32_t v)
{
    const char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char(v >> 24)};
    os.write(b, 4);
}

std::string trim(std::string s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
}

}  // namespace

WavData read_wav(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open WAV file " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string where = " in " + path.string();

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file" + where);

    bool have_fmt = false;
    int channels = 0;
    int rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t size = le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size())
            throw DataError("truncated file: chunk '" + std::string(reinterpret_cast<const char*>(chunk), 4) +
                            "' runs past end of file" + where);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16) throw DataError("truncated file: fmt chunk too short" + where);
            const std::uint16_t format = le16(bytes.data() + body);
            if (format != 1)
                throw DataError("unsupported encoding (format tag " + std::to_string(format) +
                                ", only PCM is supported)" + where);
            channels = le16(bytes.data() + body + 2);
            rate = static_cast<int>(le32(bytes.data() + body + 4));
            const int bits = le16(bytes.data() + body + 14);
            if (bits != 16)
                throw DataError("unsupported bit depth " + std::to_string(bits) + " (only 16-bit PCM)" + where);
            if (channels != 1 && channels != 2)
                throw DataError("unsupported channel count " + std::to_string(channels) + where);
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = size;
        }
        pos = body + size + (size & 1u);
    }
    if (!have_fmt) throw DataError("missing fmt chunk" + where);
    if (data == nullptr) throw DataError("missing data chunk" + where);

    const std::size_t frame = 2u * static_cast<std::size_t>(channels);
    if (data_size % frame != 0) throw DataError("truncated file: partial sample frame" + where);
    const auto frames = static_cast<Eigen::Index>(data_size / frame);

    WavData out;
    out.sample_rate = rate;
    out.channels = channels;
    out.samples.resize(frames);
    for (Eigen::Index i = 0; i < frames; ++i) {
        const unsigned char* p = data + static_cast<std::size_t>(i) * frame;
        double acc = 0;
        for (int c = 0; c < channels; ++c) acc += double(static_cast<std::int16_t>(le16(p + 2 * c)));
        out.samples(i) = acc / double(channels) / 32768.0;
    }
    return out;
}

void write_wav(const std::filesystem::path& path, const VectorXd& samples, int sample_rate)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write WAV file " + path.string());
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    os.write("RIFF", 4);
    put32(os, 36 + data_bytes);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    put32(os, 16);
    put16(os, 1);
    put16(os, 1);
    put32(os, static_cast<std::uint32_t>(sample_rate));
    put32(os, static_cast<std::uint32_t>(sample_rate) * 2);
    put16(os, 2);
    put16(os, 16);
    os.write("data", 4);
    put32(os, data_bytes);
    for (Eigen::Index i = 0; i < samples.size(); ++i) {
        const double scaled = std::round(samples(i) * 32768.0);
        const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        put16(os, static_cast<std::uint16_t>(q));
    }
    if (!os) throw DataError("failed writing WAV file " + path.string());
}

CorpusManifest read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    CorpusManifest m;
    m.root = path.parent_path();

    std::string line;
    int lineno = 0;
    bool have_rate = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (!have_rate) {
            if (line.rfind("rate=", 0) != 0)
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected header 'rate=<Hz>'");
            try {
                m.expected_sample_rate = std::stoi(line.substr(5));
            } catch (const std::exception&) {
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad sample rate '" +
                                line.substr(5) + "'");
            }
            have_rate = true;
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected '<path>\\t<label>'");
        const std::string label = line.substr(tab + 1);
        const auto emotion = parse_emotion(label);
        if (!emotion)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad label '" + label + "'");
        m.entries.push_back({line.substr(0, tab), *emotion});
    }
    if (!have_rate) throw DataError("manifest " + path.string() + " has no 'rate=' header");
    return m;
}

void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write manifest " + path.string());
    os << "rate=" << manifest.expected_sample_rate << '\n';
    for (const auto& e : manifest.entries) os << e.path << '\t' << to_string(e.label) << '\n';
}

std::vector<Recording> load_corpus(const CorpusManifest& manifest, unsigned threads)
{
    if (manifest.entries.empty()) throw DataError("empty manifest");

    std::vector<std::string> missing;
    for (const auto& e : manifest.entries)
        if (!std::filesystem::exists(manifest.root / e.path)) missing.push_back(e.path);
    if (!missing.empty()) {
        std::string msg = "missing file(s) listed in manifest:";
        for (const auto& p : missing) msg += " " + p;
        throw DataError(msg);
    }

    const std::size_t n = manifest.entries.size();
    std::vector<Recording> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                const auto& e = manifest.entries[i];
                auto wav = read_wav(manifest.root / e.path);
                if (wav.samples.size() == 0) throw DataError("empty audio in " + e.path);
                out[i].id = std::filesystem::path(e.path).stem().string();
                out[i].samples = std::move(wav.samples);
                out[i].sample_rate = wav.sample_rate;
                out[i].label = e.label;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    std::string deviants;
    for (std::size_t i = 0; i < n; ++i) {
        if (out[i].sample_rate != manifest.expected_sample_rate)
            deviants += " " + manifest.entries[i].path + " (" + std::to_string(out[i].sample_rate) + " Hz)";
    }
    if (!deviants.empty())
        throw DataError("sample rate mismatch, expected " + std::to_string(manifest.expected_sample_rate) +
                        " Hz:" + deviants);
    return out;
}

CorpusManifest emodb_manifest(const std::filesystem::path& wav_dir, int sample_rate)
{
    CorpusManifest m;
    m.root = wav_dir;
    m.expected_sample_rate = sample_rate;
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(wav_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".wav") continue;
        names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        if (name.size() < 7) continue;
        Emotion label;
        switch (name[5]) {
        case 'W': label = Emotion::anger; break;
        case 'L': label = Emotion::boredom; break;
        case 'E': label = Emotion::disgust; break;
        case 'A': label = Emotion::anxiety; break;
        case 'F': label = Emotion::happiness; break;
        case 'T': label = Emotion::sadness; break;
        case 'N': label = Emotion::neutral; break;
        default: continue;
        }
        m.entries.push_back({name, label});
    }
    if (m.entries.empty()) throw DataError("no Emo-DB style .wav files found in " + wav_dir.string());
    return m;
}

const SynthSignature& synth_signature(Emotion e)
{
    // Detail levels 1..10, then the level-10 approximation.
    static const std::array<SynthSignature, kNumEmotions> table = {{
        {{0.010, 0.020, 0.040, 0.100, 0.200, 0.300, 0.300, 0.250, 0.200, 0.100, 0.100}, 0.10, 2.0},
        {{0.030, 0.050, 0.060, 0.120, 0.150, 0.200, 0.250, 0.200, 0.150, 0.100, 0.100}, 0.50, 4.0},
        {{0.060, 0.100, 0.120, 0.200, 0.250, 0.200, 0.150, 0.120, 0.100, 0.080, 0.100}, 0.60, 5.0},
        {{0.080, 0.150, 0.170, 0.180, 0.200, 0.180, 0.150, 0.100, 0.080, 0.060, 0.100}, 0.70, 7.0},
        {{0.020, 0.040, 0.085, 0.150, 0.220, 0.250, 0.220, 0.180, 0.120, 0.080, 0.100}, 0.30, 3.0},
        {{0.120, 0.200, 0.240, 0.250, 0.220, 0.180, 0.140, 0.100, 0.080, 0.060, 0.100}, 0.80, 6.0},
        {{0.005, 0.010, 0.030, 0.060, 0.120, 0.200, 0.250, 0.250, 0.200, 0.150, 0.100}, 0.20, 1.5},
    }};
    return table[static_cast<std::size_t>(index_of(e))];
}

std::vector<Recording> synth_corpus(std::uint64_t seed, int per_class, int length, int sample_rate)
{
    if (per_class < 2) throw ConfigError("synth_corpus: per_class must be >= 2");
    if (length < 2) throw ConfigError("synth_corpus: length must be >= 2");
    if (sample_rate <= 0) throw ConfigError("synth_corpus: sample_rate must be positive");

    const auto spec = daubechies_filter(6);
    int levels = 1;
    while (levels < 10 && (Eigen::Index(1) << (levels + 1)) <= length) ++levels;
    const Eigen::Index padded = padded_length(length, levels);

    Rng rng(seed);
    std::vector<Recording> out;
    out.reserve(static_cast<std::size_t>(per_class) * kNumEmotions);
    for (int r = 0; r < per_class; ++r) {
        for (Emotion label : kEmotions) {
            const auto& sig = synth_signature(label);
            const double loudness = std::exp(0.05 * rng.normal());

            DecompositionTree<double> tree;
            tree.wavelet = spec.name;
            tree.levels = levels;
            tree.original_length = length;
            tree.padded_length = padded;
            Eigen::Index size = padded;
            for (int j = 1; j <= levels; ++j) {
                size /= 2;
                const double gain = sig.octave_gains[static_cast<std::size_t>(j - 1)] * loudness *
                                    std::exp(0.03 * rng.normal());
                VectorXd c(size);
                for (Eigen::Index i = 0; i < size; ++i) c(i) = gain * rng.normal();
                tree.subbands.push_back({j, SubbandKind::detail, 0, std::move(c)});
            }
            const double approx_gain = sig.octave_gains.back() * loudness;
            VectorXd a(size);
            for (Eigen::Index i = 0; i < size; ++i) a(i) = approx_gain * rng.normal();
            tree.subbands.push_back({levels, SubbandKind::approximation, 0, std::move(a)});

            VectorXd x = reconstruct(tree, spec);
            const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double w = 2.0 * std::numbers::pi * sig.modulation_hz / double(sample_rate);
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const double envelope = 1.0 + sig.modulation_depth * std::sin(w * double(i) + phase);
                x(i) = std::clamp(x(i) * envelope, -1.0, 1.0);
            }

            Recording rec;
            rec.label = label;
            rec.sample_rate = sample_rate;
            rec.samples = std::move(x);
            rec.id = "synth_" + std::string(to_string(label)) + "_" + std::to_string(r);
            out.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace wser
