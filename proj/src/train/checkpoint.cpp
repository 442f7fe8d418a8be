#include "mixsiam/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mixsiam/core/error.hpp"

namespace mixsiam::train {

using nlohmann::json;

namespace {

template <typename U>
void put_le(std::string& out, U bits) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename U>
U get_le(const unsigned char* p) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
    return v;
}

const char* group_names[3] = {"param", "buffer", "momentum"};

}  // namespace

std::string checkpoint_filename(std::size_t epoch) { return "ckpt_epoch_" + std::to_string(epoch) + ".bin"; }

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const bool f64 = ckpt.config.precision == 64;

    json tensors = json::array();
    std::string payload;
    const std::vector<TensorRecord>* groups[3] = {&ckpt.params, &ckpt.buffers, &ckpt.momentum};
    for (int g = 0; g < 3; ++g) {
        for (const auto& rec : *groups[g]) {
            if (ad::numel(rec.shape) != rec.values.size()) {
                throw DimensionError("write_checkpoint: " + rec.name + " has " + std::to_string(rec.values.size()) +
                                     " values for shape " + ad::to_string(rec.shape));
            }
            tensors.push_back({{"group", group_names[g]},
                               {"name", rec.name},
                               {"shape", rec.shape},
                               {"offset", payload.size()},
                               {"count", rec.values.size()}});
            for (double v : rec.values) {
                if (f64) {
                    put_le(payload, std::bit_cast<std::uint64_t>(v));
                } else {
                    put_le(payload, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
                }
            }
        }
    }

    json header;
    header["format_version"] = ckpt.format_version;
    header["config"] = to_json(ckpt.config);
    header["config_hash"] = hex(ckpt.config_hash);
    header["epoch"] = ckpt.epoch;
    header["step"] = ckpt.step;
    header["dtype"] = f64 ? "f64" : "f32";
    header["tensors"] = tensors;
    header["payload_bytes"] = payload.size();
    // Random streams are keyed by (seed, epoch, index); these seeds are all
    // the state needed to regenerate them.
    header["rng"] = {{"scheme", "keyed"},
                     {"seed", ckpt.config.seed},
                     {"data_seed", ckpt.config.shuffle_seed()},
                     {"augment_seed", ckpt.config.augment.seed}};
    header["loss_tail"] = ckpt.loss_tail;
    const std::string text = header.dump();

    std::string bytes(kCheckpointMagic, sizeof kCheckpointMagic);
    put_le(bytes, static_cast<std::uint64_t>(text.size()));
    bytes += text;
    bytes += payload;

    // Write to a temporary name first so an interrupted run never leaves a
    // truncated checkpoint under the final name.
    const auto tmp = std::filesystem::path(path).concat(".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint " + path.string(), 0);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());

    if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
        throw ParseError(path.string() + ": not a checkpoint file", 0);
    }
    const std::uint64_t header_len = get_le<std::uint64_t>(raw + 8);
    if (header_len > bytes.size() - 16) throw ParseError(path.string() + ": header runs past end of file", 8);

    json header;
    try {
        header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": bad header: " + e.what(), 16);
    }

    Checkpoint ckpt;
    const std::size_t payload_at = 16 + header_len;
    try {
        ckpt.format_version = header.at("format_version").get<int>();
        if (ckpt.format_version != kCheckpointFormatVersion) {
            throw ParseError(path.string() + ": unsupported format_version " + std::to_string(ckpt.format_version),
                             16);
        }
        ckpt.config = train_config_from_json(header.at("config"), "checkpoint.config");
        ckpt.config_hash = std::stoull(header.at("config_hash").get<std::string>(), nullptr, 16);
        ckpt.epoch = header.at("epoch").get<std::size_t>();
        ckpt.step = header.at("step").get<std::size_t>();
        ckpt.loss_tail = header.at("loss_tail").get<std::vector<double>>();
        const std::string dtype = header.at("dtype").get<std::string>();
        if (dtype != "f32" && dtype != "f64") throw ParseError(path.string() + ": unknown dtype " + dtype, 16);
        const std::size_t width = dtype == "f64" ? 8 : 4;
        const std::size_t payload_bytes = header.at("payload_bytes").get<std::size_t>();
        if (bytes.size() - payload_at != payload_bytes) {
            throw ParseError(path.string() + ": payload is " + std::to_string(bytes.size() - payload_at) +
                                 " bytes, header says " + std::to_string(payload_bytes),
                             bytes.size() < payload_at + payload_bytes ? bytes.size() : payload_at + payload_bytes);
        }
        for (const auto& t : header.at("tensors")) {
            TensorRecord rec;
            rec.name = t.at("name").get<std::string>();
            rec.shape = t.at("shape").get<ad::Shape>();
            const auto offset = t.at("offset").get<std::size_t>();
            const auto count = t.at("count").get<std::size_t>();
            if (count != ad::numel(rec.shape) || offset + count * width > payload_bytes) {
                throw ParseError(path.string() + ": tensor " + rec.name + " does not fit the payload",
                                 payload_at + offset);
            }
            rec.values.resize(count);
            const unsigned char* p = raw + payload_at + offset;
            for (std::size_t i = 0; i < count; ++i) {
                rec.values[i] = width == 8 ? std::bit_cast<double>(get_le<std::uint64_t>(p + 8 * i))
                                           : static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i)));
            }
            const std::string group = t.at("group").get<std::string>();
            if (group == "param") {
                ckpt.params.push_back(std::move(rec));
            } else if (group == "buffer") {
                ckpt.buffers.push_back(std::move(rec));
            } else if (group == "momentum") {
                ckpt.momentum.push_back(std::move(rec));
            } else {
                throw ParseError(path.string() + ": unknown tensor group " + group, 16);
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": bad header field: " + e.what(), 16);
    } catch (const ConfigError& e) {
        throw ParseError(path.string() + ": " + e.what(), 16);
    }
    return ckpt;
}

}  // namespace mixsiam::train
