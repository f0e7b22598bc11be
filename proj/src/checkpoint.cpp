#include "rnmt/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");
static_assert(sizeof(float) == 4, "checkpoint format stores IEEE-754 binary32");

namespace rnmt {

namespace {

constexpr char kMagic[] = "RNMT1\n";
constexpr std::size_t kMagicLen = 6;

/// Manifest order: model tensors, then optimizer accumulators when present.
std::vector<TensorView<float>> manifest_views(Checkpoint& ckpt) {
    auto views = tensor_views(ckpt.model);
    if (ckpt.optimizer) {
        for (auto& v : tensor_views(ckpt.optimizer->grad_sq)) {
            views.push_back({"opt.g2." + v.name, v.data, v.rows, v.cols});
        }
        for (auto& v : tensor_views(ckpt.optimizer->delta_sq)) {
            views.push_back({"opt.d2." + v.name, v.data, v.rows, v.cols});
        }
    }
    return views;
}

std::string manifest_string(const std::vector<TensorView<float>>& views) {
    std::string out;
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (i) out += ',';
        out += views[i].name;
        out += ':';
        out += std::to_string(views[i].rows);
        out += ':';
        out += std::to_string(views[i].cols);
    }
    return out;
}

std::string format_score(double score) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", score);
    return buf;
}

class ByteReader {
  public:
    explicit ByteReader(std::string bytes, std::string path)
        : bytes_(std::move(bytes)), path_(std::move(path)) {}

    std::string line() {
        const std::size_t nl = bytes_.find('\n', pos_);
        if (nl == std::string::npos) {
            throw FormatError("truncated checkpoint header: " + path_);
        }
        std::string out = bytes_.substr(pos_, nl - pos_);
        pos_ = nl + 1;
        return out;
    }

    void raw(void* dst, std::size_t count) {
        if (pos_ + count > bytes_.size()) {
            throw FormatError("truncated checkpoint tensor data: " + path_);
        }
        std::memcpy(dst, bytes_.data() + pos_, count);
        pos_ += count;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

  private:
    std::string bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

int parse_int(const std::map<std::string, std::string>& header, const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) throw FormatError("checkpoint header missing key: " + key);
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw FormatError("checkpoint header key not an integer: " + key);
    }
}

const std::string& require(const std::map<std::string, std::string>& header,
                           const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) throw FormatError("checkpoint header missing key: " + key);
    return it->second;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    auto& mutable_ckpt = const_cast<Checkpoint&>(ckpt);
    auto views = manifest_views(mutable_ckpt);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);

    const Dims& d = ckpt.model.dims;
    auto src_tokens = ckpt.source_vocab.corpus_tokens();
    auto tgt_tokens = ckpt.target_vocab.corpus_tokens();

    out.write(kMagic, static_cast<std::streamsize>(kMagicLen));
    out << "format_version=" << ckpt.format_version << '\n';
    out << "mechanism=" << mechanism_name(ckpt.model.mode.mechanism) << '\n';
    out << "output_mode=" << pooling_name(ckpt.model.mode.output) << '\n';
    out << "d_w=" << d.d_w << '\n';
    out << "d_h=" << d.d_h << '\n';
    out << "d_a=" << d.d_a << '\n';
    out << "d_r=" << d.d_r << '\n';
    out << "V_src=" << d.v_src << '\n';
    out << "V_tgt=" << d.v_tgt << '\n';
    out << "best_score=" << format_score(ckpt.best_score) << '\n';
    out << "has_optimizer=" << (ckpt.optimizer ? 1 : 0) << '\n';
    out << "src_vocab_lines=" << src_tokens.size() << '\n';
    out << "tgt_vocab_lines=" << tgt_tokens.size() << '\n';
    out << "tensors=" << manifest_string(views) << '\n';
    out << '\n';

    for (const auto& tok : src_tokens) out << tok << '\n';
    for (const auto& tok : tgt_tokens) out << tok << '\n';

    std::vector<float> row;
    for (const auto& v : views) {
        Eigen::Map<const Mat<float>> m(v.data, v.rows, v.cols);
        row.resize(static_cast<std::size_t>(v.cols));
        for (Index r = 0; r < v.rows; ++r) {
            for (Index c = 0; c < v.cols; ++c) row[static_cast<std::size_t>(c)] = m(r, c);
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(row.size() * sizeof(float)));
        }
    }
    if (!out) throw IoError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    ByteReader reader(buffer.str(), path);

    char magic[kMagicLen];
    reader.raw(magic, kMagicLen);
    if (std::memcmp(magic, kMagic, kMagicLen) != 0) {
        throw FormatError("bad checkpoint magic in " + path + " (expected RNMT1)");
    }

    std::map<std::string, std::string> header;
    for (;;) {
        std::string line = reader.line();
        if (line.empty()) break;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("malformed checkpoint header line: " + line);
        }
        header[line.substr(0, eq)] = line.substr(eq + 1);
    }

    Checkpoint ckpt;
    ckpt.format_version = parse_int(header, "format_version");
    if (ckpt.format_version != 1) {
        throw FormatError("unsupported checkpoint format_version: " +
                          std::to_string(ckpt.format_version));
    }

    ContextMode mode;
    mode.mechanism = parse_mechanism(require(header, "mechanism"));
    mode.output = parse_pooling(require(header, "output_mode"));
    Dims dims;
    dims.d_w = parse_int(header, "d_w");
    dims.d_h = parse_int(header, "d_h");
    dims.d_a = parse_int(header, "d_a");
    dims.d_r = parse_int(header, "d_r");
    dims.v_src = parse_int(header, "V_src");
    dims.v_tgt = parse_int(header, "V_tgt");
    ckpt.best_score = std::stod(require(header, "best_score"));
    const int has_optimizer = parse_int(header, "has_optimizer");

    ckpt.model = make_model<float>(dims, mode);
    if (has_optimizer) ckpt.optimizer = make_adadelta_state(ckpt.model);

    const int src_lines = parse_int(header, "src_vocab_lines");
    const int tgt_lines = parse_int(header, "tgt_vocab_lines");
    if (src_lines + Vocabulary::kNumReserved != dims.v_src ||
        tgt_lines + Vocabulary::kNumReserved != dims.v_tgt) {
        throw FormatError("vocabulary sizes disagree with V_src/V_tgt");
    }

    auto views = manifest_views(ckpt);
    if (require(header, "tensors") != manifest_string(views)) {
        throw FormatError("checkpoint tensor manifest does not match its dimensions");
    }

    std::vector<std::string> src_tokens, tgt_tokens;
    src_tokens.reserve(static_cast<std::size_t>(src_lines));
    for (int i = 0; i < src_lines; ++i) src_tokens.push_back(reader.line());
    tgt_tokens.reserve(static_cast<std::size_t>(tgt_lines));
    for (int i = 0; i < tgt_lines; ++i) tgt_tokens.push_back(reader.line());
    ckpt.source_vocab = Vocabulary::from_tokens(src_tokens);
    ckpt.target_vocab = Vocabulary::from_tokens(tgt_tokens);

    std::vector<float> row;
    for (auto& v : views) {
        Eigen::Map<Mat<float>> m(v.data, v.rows, v.cols);
        row.resize(static_cast<std::size_t>(v.cols));
        for (Index r = 0; r < v.rows; ++r) {
            reader.raw(row.data(), row.size() * sizeof(float));
            for (Index c = 0; c < v.cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
        }
    }
    if (!reader.at_end()) {
        throw FormatError("trailing bytes after checkpoint tensor data: " + path);
    }
    return ckpt;
}

}  // namespace rnmt
