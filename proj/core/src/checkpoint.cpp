#include "lcrbm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <type_traits>

#include "json.hpp"
#include "lcrbm/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace lcrbm {

namespace {

constexpr char kMagic[8] = {'L', 'C', 'R', 'B', 'M', 'C', 'K', '\n'};
constexpr uint32_t kVersion = 1;

template <typename Vec>
struct TensorRef {
    const char* name;
    Vec* data;
};

template <typename Params, typename Vec = std::conditional_t<
                               std::is_const_v<Params>, const std::vector<double>,
                               std::vector<double>>>
std::vector<TensorRef<Vec>> tensor_manifest(Params& p) {
    return {
        {"weights", &p.weights},
        {"vis_bias", &p.vis_bias},
        {"hid_bias", &p.hid_bias},
        {"genre_w", &p.labels.genre_w},
        {"genre_bias", &p.labels.genre_bias},
        {"occupation_w", &p.labels.occupation_w},
        {"occupation_bias", &p.labels.occupation_bias},
        {"age_w", &p.labels.age_w},
        {"age_bias", &p.labels.age_bias},
        {"gender_w", &p.labels.gender_w},
        {"gender_bias", &p.labels.gender_bias},
    };
}

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    nlohmann::ordered_json header;
    const ModelDims& d = ckpt.params.dims;
    header["dims"] = {{"visible_units", d.visible_units},
                      {"rating_levels", d.rating_levels},
                      {"hidden_units", d.hidden_units},
                      {"variant", variant_name(d.variant)},
                      {"genre_count", d.genre_count},
                      {"occupation_count", d.occupation_count},
                      {"age_groups", d.age_groups},
                      {"gender_count", d.gender_count}};
    header["seed"] = ckpt.seed;
    header["item_oriented"] = ckpt.item_oriented;
    header["genre_names"] = ckpt.genre_names;
    header["occupation_vocab"] = ckpt.occupation_vocab;

    nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
    for (const auto& t : tensor_manifest(ckpt.params))
        tensors.push_back({{"name", t.name}, {"size", t.data->size()}});
    header["tensors"] = tensors;

    const std::string header_text = header.dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    out.write(kMagic, sizeof kMagic);
    write_u32(out, kVersion);
    write_u64(out, header_text.size());
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& t : tensor_manifest(ckpt.params))
        out.write(reinterpret_cast<const char*>(t.data->data()),
                  static_cast<std::streamsize>(t.data->size() * sizeof(double)));
    out.flush();
    if (!out) throw ParseError(path.string() + ": write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string() + ": cannot open");
    const std::string name = path.string();

    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw ParseError(name + ": not a model checkpoint (bad magic)");
    uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (!in || version != kVersion)
        throw ParseError(name + ": unsupported checkpoint version " +
                         std::to_string(version));
    uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
    if (!in || header_len > (1u << 26))
        throw ParseError(name + ": corrupt header length");
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw ParseError(name + ": truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(name + ": header is not valid JSON: " + e.what());
    }

    Checkpoint ckpt;
    try {
        const auto& jd = header.at("dims");
        ModelDims d;
        d.visible_units = jd.at("visible_units").get<int32_t>();
        d.rating_levels = jd.at("rating_levels").get<int>();
        d.hidden_units = jd.at("hidden_units").get<int>();
        d.variant = variant_from_name(jd.at("variant").get<std::string>());
        d.genre_count = jd.at("genre_count").get<int>();
        d.occupation_count = jd.at("occupation_count").get<int>();
        d.age_groups = jd.at("age_groups").get<int>();
        d.gender_count = jd.at("gender_count").get<int>();
        ckpt.params.dims = d;
        ckpt.seed = header.at("seed").get<uint64_t>();
        ckpt.item_oriented = header.at("item_oriented").get<bool>();
        ckpt.genre_names = header.at("genre_names").get<std::vector<std::string>>();
        ckpt.occupation_vocab =
            header.at("occupation_vocab").get<std::vector<std::string>>();

        auto manifest = tensor_manifest(ckpt.params);
        const auto& jt = header.at("tensors");
        if (jt.size() != manifest.size())
            throw ValidationError(name + ": tensor manifest has " +
                                  std::to_string(jt.size()) + " entries, expected " +
                                  std::to_string(manifest.size()));
        for (size_t i = 0; i < manifest.size(); ++i) {
            if (jt[i].at("name").get<std::string>() != manifest[i].name)
                throw ValidationError(name + ": tensor " + std::to_string(i) +
                                      " is named \"" +
                                      jt[i].at("name").get<std::string>() +
                                      "\", expected \"" + manifest[i].name + "\"");
            manifest[i].data->resize(jt[i].at("size").get<size_t>());
        }
        for (const auto& t : manifest) {
            in.read(reinterpret_cast<char*>(t.data->data()),
                    static_cast<std::streamsize>(t.data->size() * sizeof(double)));
            if (!in)
                throw ParseError(name + ": truncated tensor \"" + std::string(t.name) +
                                 "\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(name + ": malformed header: " + e.what());
    }

    // size consistency against dims; label blocks of other variants must be
    // absent, not merely ignored
    const ModelDims& d = ckpt.params.dims;
    validate_dims(d);
    const size_t F = static_cast<size_t>(d.hidden_units);
    const size_t mK = static_cast<size_t>(d.visible_units) * d.rating_levels;
    const size_t G = d.variant == LabelVariant::item_genre ? d.genre_count : 0;
    const size_t O =
        d.variant == LabelVariant::user_demographic ? d.occupation_count : 0;
    const size_t A = d.variant == LabelVariant::user_demographic ? d.age_groups : 0;
    const size_t S = d.variant == LabelVariant::user_demographic ? d.gender_count : 0;
    const LabelLayers& lab = ckpt.params.labels;

    const std::pair<size_t, size_t> sizes[] = {
        {ckpt.params.weights.size(), mK * F},
        {ckpt.params.vis_bias.size(), mK},
        {ckpt.params.hid_bias.size(), F},
        {lab.genre_w.size(), G * F},
        {lab.genre_bias.size(), G},
        {lab.occupation_w.size(), O * F},
        {lab.occupation_bias.size(), O},
        {lab.age_w.size(), A * F},
        {lab.age_bias.size(), A},
        {lab.gender_w.size(), S * F},
        {lab.gender_bias.size(), S},
    };
    for (const auto& [actual, expected] : sizes)
        if (actual != expected)
            throw ValidationError(name + ": tensor sizes disagree with dims for variant " +
                                  variant_name(d.variant));
    return ckpt;
}

} // namespace lcrbm
