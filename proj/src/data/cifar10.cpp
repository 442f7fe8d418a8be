#include "mixsiam/data/cifar10.hpp"

#include <fstream>
#include <iterator>

#include "mixsiam/core/error.hpp"

namespace mixsiam::data {

std::vector<ImageRecord> parse_cifar10(std::span<const std::uint8_t> bytes, std::size_t first_index) {
    const std::size_t whole = bytes.size() / kCifarRecordBytes;
    if (bytes.size() % kCifarRecordBytes != 0) {
        throw ParseError("truncated CIFAR-10 record: " + std::to_string(bytes.size()) +
                             " bytes is not a multiple of " + std::to_string(kCifarRecordBytes),
                         whole * kCifarRecordBytes);
    }
    constexpr std::size_t plane = kCifarSide * kCifarSide;
    std::vector<ImageRecord> records(whole);
    for (std::size_t r = 0; r < whole; ++r) {
        const std::size_t offset = r * kCifarRecordBytes;
        const std::uint8_t label = bytes[offset];
        if (label >= kCifarClasses) {
            throw ParseError("CIFAR-10 label byte " + std::to_string(label) + " exceeds 9", offset);
        }
        ImageRecord& rec = records[r];
        rec.label = label;
        rec.source_index = first_index + r;
        rec.pixels = Image::blank(3, kCifarSide, kCifarSide);
        for (std::size_t i = 0; i < 3 * plane; ++i) rec.pixels.pixels[i] = byte_to_unit(bytes[offset + 1 + i]);
    }
    return records;
}

std::vector<ImageRecord> read_cifar10_file(const std::filesystem::path& path, std::size_t first_index) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CIFAR-10 batch file '" + path.string() + "'", 0);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_cifar10(bytes, first_index);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.offset());
    }
}

Dataset load_cifar10(const std::filesystem::path& dir, Split split, const Cifar10Layout& layout) {
    Dataset ds;
    ds.class_count = kCifarClasses;
    ds.name = split == Split::Train ? "cifar10-train" : "cifar10-test";
    const std::vector<std::string> files =
        split == Split::Train ? layout.train_files : std::vector<std::string>{layout.test_file};
    for (const auto& name : files) {
        auto part = read_cifar10_file(dir / name, ds.records.size());
        ds.records.insert(ds.records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    if (ds.records.empty()) throw ParseError("no CIFAR-10 records found in '" + dir.string() + "'", 0);
    return ds;
}

std::vector<std::uint8_t> encode_cifar10(const Dataset& ds) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(ds.size() * kCifarRecordBytes);
    for (const auto& rec : ds.records) {
        const Image& img = rec.pixels;
        if (img.channels != 3 || img.height != kCifarSide || img.width != kCifarSide || rec.label >= kCifarClasses) {
            throw ConfigError("record " + std::to_string(rec.source_index) + " does not fit the CIFAR-10 layout");
        }
        bytes.push_back(static_cast<std::uint8_t>(rec.label));
        for (float v : img.pixels) bytes.push_back(unit_to_byte(v));
    }
    return bytes;
}

void write_cifar10(const Dataset& ds, const std::filesystem::path& path) {
    const auto bytes = encode_cifar10(ds);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace mixsiam::data
