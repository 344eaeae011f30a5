#include "sasse/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sasse {

namespace {

static_assert(sizeof(double) == 8);

template <typename T>
T to_little_endian(T value) {
    if constexpr (std::endian::native == std::endian::little) {
        return value;
    } else {
        T out;
        auto* src = reinterpret_cast<const unsigned char*>(&value);
        auto* dst = reinterpret_cast<unsigned char*>(&out);
        for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
        return out;
    }
}

void write_doubles(std::ostream& out, const double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(data[i]));
        out.write(reinterpret_cast<const char*>(&le), 8);
    }
}

void read_doubles(std::istream& in, double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t le = 0;
        in.read(reinterpret_cast<char*>(&le), 8);
        data[i] = std::bit_cast<double>(to_little_endian(le));
    }
    if (!in) throw IoError("model file truncated while reading reals");
}

void write_u32s(std::ostream& out, const std::uint32_t* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t le = to_little_endian(data[i]);
        out.write(reinterpret_cast<const char*>(&le), 4);
    }
}

void read_u32s(std::istream& in, std::uint32_t* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t le = 0;
        in.read(reinterpret_cast<char*>(&le), 4);
        data[i] = to_little_endian(le);
    }
    if (!in) throw IoError("model file truncated while reading indices");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Section {
    std::string name;
    std::uint64_t offset;
    std::uint64_t bytes;
};

}  // namespace

void save_model(const ModelBundle& bundle, std::ostream& out) {
    bundle.validate();

    const std::size_t k = bundle.config.k;
    const std::size_t d = bundle.d;
    const std::size_t r = bundle.config.r;
    const std::size_t bits = bundle.config.label_bits();

    std::vector<Section> sections;
    std::uint64_t offset = 0;
    auto add = [&](const std::string& name, std::uint64_t size) {
        sections.push_back({name, offset, size});
        offset += size;
    };
    add("classifier", 8ull * (k - 1) * (d + 1));
    for (std::size_t c = 0; c < k; ++c) {
        const std::string prefix = "cluster" + std::to_string(c) + ".";
        add(prefix + "idx", 4ull * r);
        add(prefix + "Z", 8ull * r * bits);
        add(prefix + "W", 8ull * d * r);
    }
    const bool has_centroids = bundle.centroids.rows() != 0;
    if (has_centroids) add("centroids", 8ull * k * d);

    std::ostringstream manifest;
    manifest << "SASSE-MODEL " << bundle.format_version << "\n";
    manifest << "d " << d << "\n";
    manifest << "r " << r << "\n";
    manifest << "b " << bundle.config.b << "\n";
    manifest << "k " << k << "\n";
    manifest << "lambda " << format_double(bundle.config.lambda) << "\n";
    manifest << "threshold " << format_double(bundle.config.threshold) << "\n";
    manifest << "seed " << bundle.config.seed << "\n";
    manifest << "css " << to_string(bundle.config.css) << "\n";
    manifest << "standardize " << (bundle.config.standardize ? 1 : 0) << "\n";
    manifest << "payload_bytes " << parameter_payload_bytes(bundle) << "\n";
    for (const Section& s : sections) {
        manifest << "section " << s.name << " " << s.offset << " " << s.bytes << "\n";
    }
    manifest << "end\n";
    out << manifest.str();

    write_doubles(out, bundle.classifier.hyperplanes.data(),
                  static_cast<std::size_t>(bundle.classifier.hyperplanes.size()));
    for (const ClusterModel& c : bundle.clusters) {
        write_u32s(out, c.embedding.columns.data(), c.embedding.columns.size());
        write_doubles(out, c.embedding.z.data(), static_cast<std::size_t>(c.embedding.z.size()));
        write_doubles(out, c.regressor.w.data(), static_cast<std::size_t>(c.regressor.w.size()));
    }
    if (has_centroids) {
        write_doubles(out, bundle.centroids.data(),
                      static_cast<std::size_t>(bundle.centroids.size()));
    }
    if (!out) throw IoError("failed to write model stream");
}

ModelBundle load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty model stream");
    std::uint32_t version = 0;
    {
        std::istringstream header(line);
        std::string magic;
        header >> magic >> version;
        if (magic != "SASSE-MODEL") throw IoError("not a SASSE model file");
        if (version != kModelFormatVersion)
            throw IoError("unsupported model format version " + std::to_string(version));
    }

    std::map<std::string, std::string> fields;
    std::vector<Section> sections;
    while (std::getline(in, line)) {
        if (line == "end") break;
        std::istringstream row(line);
        std::string key;
        row >> key;
        if (key == "section") {
            Section s;
            row >> s.name >> s.offset >> s.bytes;
            if (!row) throw IoError("malformed section line: " + line);
            sections.push_back(s);
        } else {
            std::string value;
            row >> value;
            fields[key] = value;
        }
    }
    if (line != "end") throw IoError("model manifest missing 'end'");

    auto field = [&](const char* key) -> const std::string& {
        auto it = fields.find(key);
        if (it == fields.end()) throw IoError(std::string("model manifest missing '") + key + "'");
        return it->second;
    };

    ModelBundle bundle;
    bundle.format_version = version;
    bundle.d = std::stoull(field("d"));
    bundle.config.r = std::stoull(field("r"));
    bundle.config.b = std::stoi(field("b"));
    bundle.config.k = std::stoull(field("k"));
    bundle.config.lambda = std::stod(field("lambda"));
    bundle.config.threshold = std::stod(field("threshold"));
    bundle.config.seed = std::stoull(field("seed"));
    bundle.config.css = css_strategy_from_string(field("css"));
    bundle.config.standardize = field("standardize") == "1";
    bundle.config.validate();

    const std::size_t k = bundle.config.k;
    const std::size_t d = bundle.d;
    const std::size_t r = bundle.config.r;
    const std::size_t bits = bundle.config.label_bits();

    bundle.classifier.k = k;
    bundle.classifier.d = d;
    bundle.classifier.hyperplanes.resize(static_cast<Eigen::Index>(k - 1),
                                         static_cast<Eigen::Index>(d + 1));
    read_doubles(in, bundle.classifier.hyperplanes.data(),
                 static_cast<std::size_t>(bundle.classifier.hyperplanes.size()));

    bundle.clusters.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        ClusterModel& cluster = bundle.clusters[c];
        cluster.embedding.columns.resize(r);
        read_u32s(in, cluster.embedding.columns.data(), r);
        cluster.embedding.z.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(bits));
        read_doubles(in, cluster.embedding.z.data(),
                     static_cast<std::size_t>(cluster.embedding.z.size()));
        cluster.regressor.w.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
        cluster.regressor.lambda = bundle.config.lambda;
        read_doubles(in, cluster.regressor.w.data(),
                     static_cast<std::size_t>(cluster.regressor.w.size()));
    }

    bool has_centroids = false;
    for (const Section& s : sections) {
        if (s.name == "centroids") has_centroids = true;
    }
    if (has_centroids) {
        bundle.centroids.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
        read_doubles(in, bundle.centroids.data(), static_cast<std::size_t>(bundle.centroids.size()));
    }

    const std::uint64_t declared_payload = std::stoull(field("payload_bytes"));
    if (declared_payload != parameter_payload_bytes(bundle))
        throw IoError("manifest payload_bytes does not match the section layout");

    bundle.validate();
    return bundle;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    save_model(bundle, out);
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load_model(in);
}

}  // namespace sasse
