#include "mman/checkpoint.hpp"

#include <fstream>
#include <vector>

#include "mman/binio.hpp"
#include "mman/errors.hpp"
#include "mman/rng.hpp"

namespace mman {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'A', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_tensor(std::ostream& os, const Tensor& t, Precision precision) {
    if (precision == Precision::f32) {
        for (std::size_t i = 0; i < t.size(); ++i) put_f32(os, static_cast<float>(t.data()[i]));
    } else {
        for (std::size_t i = 0; i < t.size(); ++i) put_f64(os, t.data()[i]);
    }
}

Tensor get_tensor(std::istream& is, const std::vector<int>& shape, Precision precision) {
    Tensor t = shape.empty() ? Tensor::scalar(0.0) : Tensor::zeros(shape);
    if (precision == Precision::f32) {
        for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<double>(get_f32(is));
    } else {
        for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = get_f64(is);
    }
    return t;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");

    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u8(os, ckpt.params.precision() == Precision::f32 ? 0 : 1);
    put_string(os, ckpt.config_text);
    put_u64(os, ckpt.epochs_done);
    put_u64(os, static_cast<std::uint64_t>(ckpt.params.step()));

    const auto names = ckpt.params.names();
    put_u64(os, names.size());
    for (const auto& name : names) {
        const auto& slot = ckpt.params.slot(name);
        put_string(os, name);
        const auto& shape = slot.value.shape();
        put_u32(os, static_cast<std::uint32_t>(shape.size()));
        for (int d : shape) put_u32(os, static_cast<std::uint32_t>(d));
        put_tensor(os, slot.value, ckpt.params.precision());
        put_tensor(os, slot.m, ckpt.params.precision());
        put_tensor(os, slot.v, ckpt.params.precision());
    }
    if (!os) throw Error("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());

    char magic[4];
    if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) {
        throw Error(path.string() + " is not a model checkpoint");
    }
    const std::uint32_t version = get_u32(is);
    if (version != kVersion) {
        throw Error("unsupported checkpoint version " + std::to_string(version));
    }

    Checkpoint ckpt;
    const std::uint8_t prec = get_u8(is);
    if (prec > 1) throw Error("bad precision flag in " + path.string());
    ckpt.params.set_precision(prec == 0 ? Precision::f32 : Precision::f64);
    ckpt.config_text = get_string(is);
    ckpt.epochs_done = get_u64(is);
    ckpt.params.set_step(static_cast<long long>(get_u64(is)));

    const std::uint64_t n = get_u64(is);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string name = get_string(is);
        const std::uint32_t rank = get_u32(is);
        if (rank > 2) throw Error("bad tensor rank in " + path.string());
        std::vector<int> shape;
        for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(get_u32(is)));
        ParameterSet::Slot slot;
        slot.value = get_tensor(is, shape, ckpt.params.precision());
        slot.m = get_tensor(is, shape, ckpt.params.precision());
        slot.v = get_tensor(is, shape, ckpt.params.precision());
        ckpt.params.install(name, std::move(slot));
    }
    return ckpt;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::uint64_t h = 14695981039346656037ull;
    char buf[65536];
    while (is.read(buf, sizeof buf) || is.gcount() > 0) {
        h = fnv1a64(buf, static_cast<std::size_t>(is.gcount()), h);
        if (!is) break;
    }
    return h;
}

}  // namespace mman
