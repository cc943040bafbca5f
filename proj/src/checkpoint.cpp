#include "stegofield/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "stegofield/error.hpp"

namespace stegofield {
namespace {

constexpr char kMagic[4] = {'S', 'N', 'G', 'P'};

class Writer {
public:
    explicit Writer(std::size_t capacity) { bytes_.reserve(capacity); }

    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f32s(std::span<const float> values) {
        for (float v : values) f32(v);
    }
    void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32() {
        const float v = std::bit_cast<float>(u32());
        if (!std::isfinite(v)) throw DataError(DataError::Kind::NonFinite, "checkpoint: non-finite parameter");
        return v;
    }
    void f32s(std::span<float> out) {
        need(out.size() * 4);
        for (float& v : out) v = f32();
    }
    std::size_t position() const noexcept { return pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw DataError(DataError::Kind::Truncated, "checkpoint: truncated");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::size_t checkpoint_size(const HashGridConfig& grid, FieldMode mode, int hidden_width, int hidden_layers) {
    const MlpSpec spec = StegoField::mlp_spec_for(grid, mode, hidden_width, hidden_layers);
    return kCheckpointHeaderBytes + 4 * grid.parameter_count() + 4 * spec.parameter_count();
}

std::vector<std::uint8_t> serialize_checkpoint(const StegoField& field) {
    const HashGridConfig& g = field.grid();
    Writer w(checkpoint_size(g, field.mode(), field.hidden_width(), field.hidden_layers()));
    w.raw(kMagic, 4);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(g.levels));
    w.u32(static_cast<std::uint32_t>(g.log2_table_size));
    w.u32(static_cast<std::uint32_t>(g.features));
    w.u32(static_cast<std::uint32_t>(g.min_resolution));
    w.u32(static_cast<std::uint32_t>(g.max_resolution));
    w.u32(static_cast<std::uint32_t>(field.hidden_width()));
    w.u32(static_cast<std::uint32_t>(field.hidden_layers()));
    w.u8(static_cast<std::uint8_t>(g.dims));
    w.u8(static_cast<std::uint8_t>(field.mode()));
    w.u8(field.white_background ? 1 : 0);
    w.u8(0);
    w.f32s(field.bounding_box.scale);
    w.f32s(field.bounding_box.offset);
    w.f32s(field.tables().values());
    const MlpParams<float>& mlp = field.mlp();
    for (int l = 0; l < mlp.spec().layer_count(); ++l) {
        w.f32s(mlp.weights(l));
        w.f32s(mlp.bias(l));
    }
    return w.take();
}

StegoField deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw DataError(DataError::Kind::Truncated, "checkpoint: truncated");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError(DataError::Kind::BadMagic, "checkpoint: bad magic");
    Reader r(bytes.subspan(4));
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw DataError(DataError::Kind::VersionMismatch, "checkpoint: unsupported version " + std::to_string(version));

    HashGridConfig g;
    g.levels = static_cast<int>(r.u32());
    g.log2_table_size = static_cast<int>(r.u32());
    g.features = static_cast<int>(r.u32());
    g.min_resolution = static_cast<int>(r.u32());
    g.max_resolution = static_cast<int>(r.u32());
    const int hidden_width = static_cast<int>(r.u32());
    const int hidden_layers = static_cast<int>(r.u32());
    g.dims = r.u8();
    const std::uint8_t mode_byte = r.u8();
    const std::uint8_t background = r.u8();
    r.u8();
    if (mode_byte > 1) throw DataError(DataError::Kind::Format, "checkpoint: unknown field mode");
    const auto mode = static_cast<FieldMode>(mode_byte);

    try {
        g.validate();
        if (g.dims != field_dims(mode)) throw std::invalid_argument("dimensionality does not match mode");
        if (hidden_width < 1 || hidden_layers < 0 || hidden_layers > 64) throw std::invalid_argument("bad MLP shape");
    } catch (const std::invalid_argument& e) {
        throw DataError(DataError::Kind::Format, std::string("checkpoint: ") + e.what());
    }
    const std::size_t expected = checkpoint_size(g, mode, hidden_width, hidden_layers);
    if (bytes.size() < expected) throw DataError(DataError::Kind::Truncated, "checkpoint: truncated");
    if (bytes.size() > expected) throw DataError(DataError::Kind::Format, "checkpoint: trailing bytes");

    StegoField field(g, mode, hidden_width, hidden_layers);
    field.white_background = background != 0;
    r.f32s(field.bounding_box.scale);
    r.f32s(field.bounding_box.offset);
    r.f32s(field.tables().values());
    MlpParams<float>& mlp = field.mlp();
    for (int l = 0; l < mlp.spec().layer_count(); ++l) {
        r.f32s(mlp.weights(l));
        r.f32s(mlp.bias(l));
    }
    return field;
}

void save_checkpoint(const StegoField& field, const std::filesystem::path& path) {
    for (float v : field.tables().values())
        if (!std::isfinite(v)) throw NumericalError("refusing to save a checkpoint with non-finite parameters");
    for (float v : field.mlp().values())
        if (!std::isfinite(v)) throw NumericalError("refusing to save a checkpoint with non-finite parameters");
    const auto bytes = serialize_checkpoint(field);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(DataError::Kind::Io, "cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError(DataError::Kind::Io, "failed writing checkpoint " + path.string());
}

StegoField load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(DataError::Kind::Io, "cannot read checkpoint " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

}  // namespace stegofield
