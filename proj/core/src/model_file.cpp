#include "stallpred/model_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stallpred/crc32.hpp"
#include "stallpred/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "model file stores raw little-endian float64 tensors");

namespace stallpred {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'M', 'F'};
constexpr std::uint32_t kVersion = 1;

using nlohmann::ordered_json;

}  // namespace

void save_model(const Model& m, const Standardizer& s, const std::string& path) {
    ordered_json manifest;
    manifest["format_version"] = kVersion;
    manifest["spec"] = ordered_json::parse(spec_to_json(m.spec));
    manifest["rng_seed"] = m.rng_seed;
    manifest["standardizer"] = {{"mean", s.mean},
                                {"stddev", s.stddev},
                                {"sigma_floor", s.sigma_floor}};
    ordered_json tensors = ordered_json::array();
    std::size_t total = 0;
    for_each_tensor(m.params, [&](std::string_view name, const std::vector<double>& t) {
        tensors.push_back({{"name", std::string(name)}, {"size", t.size()}});
        total += t.size();
    });
    manifest["param_count"] = total;
    manifest["tensors"] = tensors;
    const std::string mtext = manifest.dump();

    std::string out;
    out.append(kMagic, 4);
    const std::uint32_t version = kVersion;
    out.append(reinterpret_cast<const char*>(&version), 4);
    const std::uint64_t mlen = mtext.size();
    out.append(reinterpret_cast<const char*>(&mlen), 8);
    out += mtext;
    for_each_tensor(m.params, [&](std::string_view, const std::vector<double>& t) {
        out.append(reinterpret_cast<const char*>(t.data()), t.size() * 8);
    });
    const std::uint32_t checksum = crc32(out.data(), out.size());
    out.append(reinterpret_cast<const char*>(&checksum), 4);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("model file: cannot write " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("model file: write failed for " + path);
}

std::pair<Model, Standardizer> load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("model file: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (buf.size() < 20) throw FormatError("model file: truncated");
    if (std::memcmp(buf.data(), kMagic, 4) != 0) throw FormatError("model file: bad magic");

    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
    const std::uint32_t actual_crc = crc32(buf.data(), buf.size() - 4);
    if (stored_crc != actual_crc)
        throw CorruptFileError("model file: checksum mismatch");

    std::uint32_t version;
    std::memcpy(&version, buf.data() + 4, 4);
    if (version != kVersion)
        throw VersionError("model file: unsupported format version " + std::to_string(version));

    std::uint64_t mlen;
    std::memcpy(&mlen, buf.data() + 8, 8);
    std::size_t pos = 16;
    if (pos + mlen + 4 > buf.size()) throw FormatError("model file: truncated manifest");
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(buf.substr(pos, mlen));
    } catch (const std::exception& e) {
        throw FormatError(std::string("model file: manifest: ") + e.what());
    }
    pos += mlen;

    Model m;
    m.spec = spec_from_json_text(manifest.at("spec").dump());
    m.rng_seed = manifest.value("rng_seed", std::uint64_t{0});
    // init_model gives the params the right shapes; the stored tensors then
    // overwrite every value.
    m = init_model(m.spec, m.rng_seed);

    const std::size_t expect = manifest.at("param_count").get<std::size_t>();
    if (expect != scalar_count(m.params))
        throw FormatError("model file: param_count does not match spec");
    if (pos + expect * 8 + 4 != buf.size())
        throw FormatError("model file: tensor payload size mismatch");

    for_each_tensor(m.params, [&](std::string_view, std::vector<double>& t) {
        std::memcpy(t.data(), buf.data() + pos, t.size() * 8);
        pos += t.size() * 8;
    });

    Standardizer s;
    s.mean = manifest.at("standardizer").at("mean").get<Vector>();
    s.stddev = manifest.at("standardizer").at("stddev").get<Vector>();
    s.sigma_floor = manifest.at("standardizer").value("sigma_floor", 1e-8);
    return {std::move(m), std::move(s)};
}

}  // namespace stallpred
