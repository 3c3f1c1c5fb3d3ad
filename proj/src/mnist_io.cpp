#include "labelsim/mnist_io.hpp"

#include <fstream>

namespace labelsim::mnist {

namespace {

constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr std::uint32_t kImageMagic = 0x00000803;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IdxError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_u32_be(std::span<const std::uint8_t> bytes, std::size_t offset) {
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t value) {
    const char bytes[4] = {
        static_cast<char>((value >> 24) & 0xFF),
        static_cast<char>((value >> 16) & 0xFF),
        static_cast<char>((value >> 8) & 0xFF),
        static_cast<char>(value & 0xFF),
    };
    out.write(bytes, 4);
}

} // namespace

IdxLabels read_idx_labels(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() < 8) {
        throw IdxError(path.string() + ": truncated header");
    }
    const std::uint32_t magic = read_u32_be(bytes, 0);
    if (magic != kLabelMagic) {
        throw IdxError(path.string() + ": wrong magic for a label file");
    }
    const std::uint32_t count = read_u32_be(bytes, 4);
    if (bytes.size() != 8 + static_cast<std::size_t>(count)) {
        throw IdxError(path.string() + ": size does not match item count");
    }
    IdxLabels out;
    out.labels.assign(bytes.begin() + 8, bytes.end());
    for (std::uint8_t l : out.labels) {
        if (l >= 10) {
            throw IdxError(path.string() + ": label out of digit range");
        }
    }
    return out;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() < 16) {
        throw IdxError(path.string() + ": truncated header");
    }
    const std::uint32_t magic = read_u32_be(bytes, 0);
    if (magic != kImageMagic) {
        throw IdxError(path.string() + ": wrong magic for an image file");
    }
    IdxImages out;
    out.count = read_u32_be(bytes, 4);
    out.rows = static_cast<int>(read_u32_be(bytes, 8));
    out.cols = static_cast<int>(read_u32_be(bytes, 12));
    if (out.rows != 28 || out.cols != 28) {
        throw IdxError(path.string() + ": expected 28x28 images");
    }
    const std::size_t expected = 16 + static_cast<std::size_t>(out.count) * 28 * 28;
    if (bytes.size() != expected) {
        throw IdxError(path.string() + ": size does not match image count");
    }
    out.pixels.assign(bytes.begin() + 16, bytes.end());
    return out;
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IdxError("cannot create " + path.string());
    }
    write_u32_be(out, kLabelMagic);
    write_u32_be(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
    if (!out) {
        throw IdxError("write failed for " + path.string());
    }
}

RelabelOutput relabel_campaign(const IdxLabels& labels, double noise, const Policy& policy,
                               std::int64_t s_max, std::uint64_t master_seed,
                               const std::filesystem::path& out_dir, int threads) {
    if (labels.count() == 0) {
        throw std::invalid_argument("relabel_campaign: empty label set");
    }
    std::vector<Example> examples;
    examples.reserve(labels.labels.size());
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        examples.push_back(Example{static_cast<std::int64_t>(i),
                                   static_cast<LabelId>(labels.labels[i]),
                                   {}});
    }

    const UniformNoiseOracle oracle(10, noise);
    RelabelOutput out;
    out.result = run_campaign(oracle, policy, s_max, examples, master_seed, threads);

    std::filesystem::create_directories(out_dir);
    out.labels_path = out_dir / "labels.idx";
    out.csv_path = out_dir / "provenance.csv";
    out.summary_path = out_dir / "summary.txt";

    std::vector<std::uint8_t> assigned;
    assigned.reserve(out.result.labeled.size());
    for (const auto& r : out.result.labeled) {
        assigned.push_back(static_cast<std::uint8_t>(r.assigned_label));
    }
    write_idx_labels(out.labels_path, assigned);

    {
        std::ofstream csv(out.csv_path, std::ios::trunc);
        if (!csv) throw IdxError("cannot create " + out.csv_path.string());
        write_campaign_csv(csv, out.result);
    }
    {
        std::ofstream summary(out.summary_path, std::ios::trunc);
        if (!summary) throw IdxError("cannot create " + out.summary_path.string());
        write_summary(summary, summarize(out.result));
    }
    return out;
}

} // namespace labelsim::mnist
