#include "stallpred/dataset_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stallpred/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset container stores raw little-endian float64 blocks");

namespace stallpred {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

using nlohmann::ordered_json;

void put_u32(std::string& out, std::uint32_t v) {
    out.append(reinterpret_cast<const char*>(&v), 4);
}

void put_u64(std::string& out, std::uint64_t v) {
    out.append(reinterpret_cast<const char*>(&v), 8);
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw FormatError("dataset file: truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, buf.data() + pos, 4);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v;
        std::memcpy(&v, buf.data() + pos, 8);
        pos += 8;
        return v;
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }
    double f64() {
        need(8);
        double v;
        std::memcpy(&v, buf.data() + pos, 8);
        pos += 8;
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

void append_split(std::string& out, const Dataset& ds) {
    for (const auto& s : ds.samples)
        out.append(reinterpret_cast<const char*>(s.x.data.data()), s.x.data.size() * 8);
    for (const auto& s : ds.samples) out.push_back(static_cast<char>(s.label));
    for (const auto& p : ds.provenance) {
        put_u32(out, p.series_index);
        put_u32(out, p.window_end);
        put_u32(out, p.label_index);
        out.push_back(p.window_has_warning ? 1 : 0);
    }
}

Dataset read_split(Reader& r, std::size_t count, std::size_t features, std::size_t window_len,
                   const std::vector<std::string>& series_ids) {
    Dataset ds;
    ds.samples.resize(count);
    ds.provenance.resize(count);
    for (auto& s : ds.samples) {
        s.x = Matrix(features, window_len);
        for (double& v : s.x.data) v = r.f64();
    }
    for (auto& s : ds.samples) s.label = r.u8() != 0 ? 1 : 0;
    for (auto& p : ds.provenance) {
        p.series_index = r.u32();
        p.window_end = r.u32();
        p.label_index = r.u32();
        p.window_has_warning = r.u8() != 0;
        if (p.series_index < series_ids.size()) p.series_id = series_ids[p.series_index];
    }
    return ds;
}

}  // namespace

void save_dataset(const PreparedDataset& pd, const std::string& path) {
    const std::size_t features =
        pd.splits.train.samples.empty() ? kNumFlightParams : pd.splits.train.samples[0].x.rows;

    ordered_json manifest;
    manifest["format_version"] = kVersion;
    manifest["features"] = features;
    manifest["window_len"] = pd.window_len;
    manifest["horizon"] = pd.horizon;
    manifest["seed"] = pd.seed;
    manifest["counts"] = {{"train", pd.splits.train.size()},
                          {"val", pd.splits.val.size()},
                          {"test", pd.splits.test.size()}};
    manifest["standardizer"] = {{"mean", pd.standardizer.mean},
                                {"stddev", pd.standardizer.stddev},
                                {"sigma_floor", pd.standardizer.sigma_floor}};
    manifest["column_order"] = kFlightParamNames;
    manifest["series_ids"] = pd.series_ids;
    const std::string mtext = manifest.dump();

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u64(out, mtext.size());
    out += mtext;
    append_split(out, pd.splits.train);
    append_split(out, pd.splits.val);
    append_split(out, pd.splits.test);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("dataset file: cannot write " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("dataset file: write failed for " + path);
}

PreparedDataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("dataset file: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{buf};
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FormatError("dataset file: bad magic");
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw VersionError("dataset file: unsupported format version " + std::to_string(version));
    const std::uint64_t mlen = r.u64();
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(r.bytes(mlen));
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(std::string("dataset file: manifest: ") + e.what());
    }

    PreparedDataset pd;
    pd.seed = manifest.value("seed", std::uint64_t{0});
    pd.window_len = manifest.at("window_len").get<std::size_t>();
    pd.horizon = manifest.value("horizon", std::size_t{10});
    const std::size_t features = manifest.at("features").get<std::size_t>();
    pd.standardizer.mean = manifest.at("standardizer").at("mean").get<Vector>();
    pd.standardizer.stddev = manifest.at("standardizer").at("stddev").get<Vector>();
    pd.standardizer.sigma_floor = manifest.at("standardizer").value("sigma_floor", 1e-8);
    pd.series_ids = manifest.value("series_ids", std::vector<std::string>{});

    const std::size_t n_train = manifest.at("counts").at("train").get<std::size_t>();
    const std::size_t n_val = manifest.at("counts").at("val").get<std::size_t>();
    const std::size_t n_test = manifest.at("counts").at("test").get<std::size_t>();

    pd.splits.train = read_split(r, n_train, features, pd.window_len, pd.series_ids);
    pd.splits.val = read_split(r, n_val, features, pd.window_len, pd.series_ids);
    pd.splits.test = read_split(r, n_test, features, pd.window_len, pd.series_ids);
    if (r.pos != buf.size()) throw FormatError("dataset file: trailing bytes");
    return pd;
}

}  // namespace stallpred
