#include "ams/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ams/digest.hpp"
#include "ams/parallel.hpp"
#include "ams/rng.hpp"

#include "json.hpp"

namespace ams {

namespace {

const char kMagic[8] = {'A', 'M', 'S', 'Q', 'T', 'B', '0', '1'};

std::string sidedness_name(Sidedness s) {
    return s == Sidedness::TwoSided ? "two-sided" : "one-sided-upper";
}

}  // namespace

std::string QuantileKey::canonical() const {
    std::ostringstream out;
    out << "n=" << n << " d=" << d << " system={" << system_digest << "} calibration={"
        << calibration_digest << "} sidedness=" << sidedness_name(sidedness)
        << " mc_runs=" << mc_runs << " seed=" << seed;
    return out.str();
}

double QuantileTable::quantile_for_alpha(double alpha) const {
    auto it = quantiles.find(alpha);
    if (it != quantiles.end()) return it->second;
    return empirical_quantile(samples, 1.0 - alpha);
}

double empirical_quantile(std::span<const double> sorted_samples, double p) {
    if (sorted_samples.empty()) throw DomainError("empirical quantile of an empty sample");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile order p must lie in (0,1)");
    const auto n = static_cast<double>(sorted_samples.size());
    auto index = static_cast<std::int64_t>(std::ceil(p * n));  // 1-based order statistic
    index = std::clamp<std::int64_t>(index, 1, sorted_samples.size());
    return sorted_samples[static_cast<std::size_t>(index - 1)];
}

QuantileTable simulate_mn(const RegionSystem& system, const Calibration& cal,
                          Sidedness sidedness, int mc_runs, std::uint64_t seed,
                          int threads, std::span<const double> alphas) {
    if (mc_runs < 1) throw ConfigError("mc_runs must be >= 1");
    if (system.empty()) throw EmptySystem("region system has no scales");

    QuantileTable table;
    table.key = QuantileKey{system.n,
                            system.d,
                            system.digest_string(),
                            cal.digest_string(),
                            sidedness,
                            mc_runs,
                            seed};
    table.samples.resize(static_cast<std::size_t>(mc_runs));

    // each replicate draws from its own substream: worker count cannot change
    // the sample, only the order of computation
    parallel_for(mc_runs, threads, [&](std::int64_t r) {
        const Field noise = standard_normal_field(
            system.n, system.d, substream_seed(seed, static_cast<std::uint64_t>(r)));
        table.samples[static_cast<std::size_t>(r)] =
            surrogate_statistic(noise, system, cal, sidedness, 1);
    });

    std::sort(table.samples.begin(), table.samples.end());
    for (double alpha : alphas)
        table.quantiles[alpha] = empirical_quantile(table.samples, 1.0 - alpha);
    return table;
}

std::filesystem::path quantile_cache_path(const std::filesystem::path& store,
                                          const QuantileKey& key) {
    return store / ("mn_" + to_hex(fnv1a64(key.canonical())) + ".amsq");
}

void save_quantile_table(const std::filesystem::path& path, const QuantileTable& table) {
    nlohmann::json header;
    header["format"] = 1;
    header["n"] = table.key.n;
    header["d"] = table.key.d;
    header["system"] = table.key.system_digest;
    header["calibration"] = table.key.calibration_digest;
    header["sidedness"] = sidedness_name(table.key.sidedness);
    header["mc_runs"] = table.key.mc_runs;
    header["seed"] = table.key.seed;
    header["count"] = table.samples.size();
    const std::string header_str = header.dump();

    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write quantile cache file " + tmp);
        out.write(kMagic, sizeof kMagic);
        const std::uint64_t len = header_str.size();
        out.write(reinterpret_cast<const char*>(&len), sizeof len);
        out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
        const auto* bytes = reinterpret_cast<const unsigned char*>(table.samples.data());
        const std::size_t nbytes = table.samples.size() * sizeof(double);
        out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(nbytes));
        const std::uint64_t checksum = fnv1a64({bytes, nbytes});
        out.write(reinterpret_cast<const char*>(&checksum), sizeof checksum);
        if (!out) throw IoError("short write on quantile cache file " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

QuantileTable load_quantile_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open quantile cache file " + path.string());

    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw CacheCorrupt("bad magic in " + path.string());
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len > (1u << 20)) throw CacheCorrupt("bad header length in " + path.string());
    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    if (!in) throw CacheCorrupt("truncated header in " + path.string());

    nlohmann::json header = nlohmann::json::parse(header_str, nullptr, false);
    if (header.is_discarded() || header.value("format", 0) != 1)
        throw CacheCorrupt("unreadable header in " + path.string());

    QuantileTable table;
    try {
        table.key.n = header.at("n").get<int>();
        table.key.d = header.at("d").get<int>();
        table.key.system_digest = header.at("system").get<std::string>();
        table.key.calibration_digest = header.at("calibration").get<std::string>();
        table.key.sidedness = header.at("sidedness").get<std::string>() == "two-sided"
                                  ? Sidedness::TwoSided
                                  : Sidedness::OneSidedUpper;
        table.key.mc_runs = header.at("mc_runs").get<int>();
        table.key.seed = header.at("seed").get<std::uint64_t>();
        table.samples.resize(header.at("count").get<std::size_t>());
    } catch (const nlohmann::json::exception&) {
        throw CacheCorrupt("incomplete header in " + path.string());
    }

    auto* bytes = reinterpret_cast<char*>(table.samples.data());
    const std::size_t nbytes = table.samples.size() * sizeof(double);
    in.read(bytes, static_cast<std::streamsize>(nbytes));
    std::uint64_t checksum = 0;
    in.read(reinterpret_cast<char*>(&checksum), sizeof checksum);
    if (!in) throw CacheCorrupt("truncated samples in " + path.string());
    const std::uint64_t actual =
        fnv1a64({reinterpret_cast<const unsigned char*>(bytes), nbytes});
    if (actual != checksum) throw CacheCorrupt("checksum mismatch in " + path.string());

    if (!std::is_sorted(table.samples.begin(), table.samples.end()))
        throw CacheCorrupt("samples not sorted in " + path.string());
    for (double alpha : kDefaultAlphas)
        table.quantiles[alpha] = empirical_quantile(table.samples, 1.0 - alpha);
    return table;
}

QuantileTable cache_lookup_or_simulate(const std::filesystem::path& store,
                                       const RegionSystem& system, const Calibration& cal,
                                       Sidedness sidedness, int mc_runs, std::uint64_t seed,
                                       int threads, std::ostream* warn,
                                       std::span<const double> alphas) {
    QuantileKey key{system.n,  system.d, system.digest_string(), cal.digest_string(),
                    sidedness, mc_runs,  seed};
    const auto path = quantile_cache_path(store, key);
    if (std::filesystem::exists(path)) {
        try {
            QuantileTable table = load_quantile_table(path);
            if (table.key == key) {
                for (double alpha : alphas)
                    table.quantiles[alpha] = empirical_quantile(table.samples, 1.0 - alpha);
                return table;
            }
            if (warn)
                *warn << "quantile cache key mismatch at " << path.string()
                      << "; re-simulating\n";
        } catch (const CacheCorrupt& e) {
            if (warn) *warn << "quantile cache corrupt (" << e.what() << "); re-simulating\n";
        }
    }
    QuantileTable table = simulate_mn(system, cal, sidedness, mc_runs, seed, threads, alphas);
    save_quantile_table(path, table);
    return table;
}

}  // namespace ams
