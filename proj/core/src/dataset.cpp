#include "lcrbm/dataset.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lcrbm/errors.hpp"
#include "lcrbm/rng.hpp"

namespace lcrbm {

namespace {

// Genre ordering of the 100K distribution; parse_1m seeds its vocabulary with
// this so genre indices agree across the two datasets where names match.
const std::vector<std::string> k100kGenreOrder = {
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
    "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western"};

// Occupation code table of the 1M distribution (codes 0..20).
const std::vector<std::string> k1mOccupations = {
    "other", "academic/educator", "artist", "clerical/admin",
    "college/grad student", "customer service", "doctor/health care",
    "executive/managerial", "farmer", "homemaker", "K-12 student", "lawyer",
    "programmer", "retired", "sales/marketing", "scientist", "self-employed",
    "technician/engineer", "tradesman/craftsman", "unemployed", "writer"};

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::vector<std::string> split(const std::string& line, const std::string& sep) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + sep.size();
    }
    return fields;
}

int64_t parse_int(const std::string& text, const std::string& file, size_t line_no,
                  const char* what) {
    try {
        size_t consumed = 0;
        const int64_t value = std::stoll(text, &consumed);
        if (consumed != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw ParseError(file, line_no, std::string("expected integer ") + what +
                                            ", got \"" + text + "\"");
    }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open");
    return in;
}

// Parses a ratings file in "user<sep>item<sep>rating<sep>timestamp" form into
// dense triples through the dataset's id maps.
std::vector<RatingTriple> parse_ratings_file(const std::filesystem::path& path,
                                             const std::string& sep,
                                             const RatingDataset& ids) {
    std::ifstream in = open_or_throw(path);
    const std::string name = path.string();
    std::vector<RatingTriple> triples;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields =
            sep.size() == 1 ? split(line, sep[0]) : split(line, sep);
        if (fields.size() != 4)
            throw ParseError(name, line_no,
                             "expected 4 fields, got " + std::to_string(fields.size()));
        const int64_t raw_user = parse_int(fields[0], name, line_no, "user id");
        const int64_t raw_item = parse_int(fields[1], name, line_no, "item id");
        const int64_t rating = parse_int(fields[2], name, line_no, "rating");
        const int64_t timestamp = parse_int(fields[3], name, line_no, "timestamp");
        if (rating < 1 || rating > ids.rating_levels)
            throw ValidationError(name + ":" + std::to_string(line_no) +
                                  ": rating " + std::to_string(rating) +
                                  " outside 1.." + std::to_string(ids.rating_levels));
        const auto user_it = ids.user_id_map.find(raw_user);
        if (user_it == ids.user_id_map.end())
            throw ValidationError(name + ":" + std::to_string(line_no) +
                                  ": user id " + std::to_string(raw_user) +
                                  " not present in user metadata");
        const auto item_it = ids.item_id_map.find(raw_item);
        if (item_it == ids.item_id_map.end())
            throw ValidationError(name + ":" + std::to_string(line_no) +
                                  ": item id " + std::to_string(raw_item) +
                                  " not present in item metadata");
        triples.push_back({user_it->second, item_it->second,
                           static_cast<int8_t>(rating), timestamp});
    }
    return triples;
}

void check_unique_pairs(const std::vector<RatingTriple>& triples, const std::string& context) {
    std::vector<int64_t> keys;
    keys.reserve(triples.size());
    for (const auto& t : triples)
        keys.push_back((static_cast<int64_t>(t.user_id) << 32) | static_cast<uint32_t>(t.item_id));
    std::sort(keys.begin(), keys.end());
    const auto dup = std::adjacent_find(keys.begin(), keys.end());
    if (dup != keys.end())
        throw ValidationError(context + ": duplicate (user,item) rating pair (user " +
                              std::to_string(*dup >> 32) + ", item " +
                              std::to_string(*dup & 0xffffffff) + ")");
}

RatingDataset with_triples(const RatingDataset& base, std::vector<RatingTriple> triples) {
    RatingDataset out = base;
    out.triples = std::move(triples);
    return out;
}

} // namespace

int hot_index(const std::vector<uint8_t>& onehot) {
    for (size_t i = 0; i < onehot.size(); ++i)
        if (onehot[i]) return static_cast<int>(i);
    return -1;
}

int age_group_index(int age_years) {
    // Upper bound of each group, shared endpoints already resolved downward.
    static constexpr std::array<int, kAgeGroups> upper = {14, 21, 28, 36, 48, 55, 65, 73};
    for (int g = 0; g < kAgeGroups; ++g)
        if (age_years <= upper[g]) return g;
    return kAgeGroups - 1; // clamp above 73
}

std::vector<uint8_t> encode_age(int age_years) {
    std::vector<uint8_t> onehot(kAgeGroups, 0);
    onehot[age_group_index(age_years)] = 1;
    return onehot;
}

std::vector<uint8_t> encode_gender(char code) {
    if (code == 'M') return {1, 0};
    if (code == 'F') return {0, 1};
    throw ValidationError(std::string("gender code must be M or F, got '") + code + "'");
}

std::vector<uint8_t> encode_occupation(const std::string& label,
                                       const std::vector<std::string>& vocabulary) {
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), label);
    if (it == vocabulary.end())
        throw ValidationError("occupation \"" + label + "\" not in vocabulary");
    std::vector<uint8_t> onehot(vocabulary.size(), 0);
    onehot[it - vocabulary.begin()] = 1;
    return onehot;
}

RatingDataset parse_100k(const std::filesystem::path& data_dir) {
    RatingDataset ds;

    // u.occupation fixes the occupation vocabulary order.
    {
        const auto path = data_dir / "u.occupation";
        std::ifstream in = open_or_throw(path);
        std::string line;
        while (std::getline(in, line)) {
            line = strip_cr(line);
            if (!line.empty()) ds.occupation_vocab.push_back(line);
        }
        if (ds.occupation_vocab.empty())
            throw ParseError(path.string() + ": no occupations listed");
    }

    // u.genre gives the genre names; fall back to counting u.item flag fields.
    {
        const auto path = data_dir / "u.genre";
        std::ifstream in(path);
        if (in) {
            std::string line;
            size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                line = strip_cr(line);
                if (line.empty()) continue;
                const auto fields = split(line, '|');
                if (fields.empty() || fields[0].empty())
                    throw ParseError(path.string(), line_no, "expected genre name");
                ds.genre_names.push_back(fields[0]);
            }
        }
    }

    // u.item: id | title | release | video release | url | G genre flags.
    {
        const auto path = data_dir / "u.item";
        std::ifstream in = open_or_throw(path);
        const std::string name = path.string();
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            line = strip_cr(line);
            if (line.empty()) continue;
            const auto fields = split(line, '|');
            if (ds.genre_names.empty()) {
                // No u.genre file; everything after the 5 fixed fields is a flag.
                if (fields.size() <= 5)
                    throw ParseError(name, line_no, "no genre flag fields");
                for (size_t g = 0; g + 5 < fields.size(); ++g)
                    ds.genre_names.push_back("genre" + std::to_string(g));
            }
            const size_t genre_count = ds.genre_names.size();
            if (fields.size() < genre_count + 2)
                throw ParseError(name, line_no,
                                 "expected at least " + std::to_string(genre_count + 2) +
                                     " fields, got " + std::to_string(fields.size()));
            const int64_t raw_id = parse_int(fields[0], name, line_no, "movie id");
            if (ds.item_id_map.count(raw_id))
                throw ValidationError(name + ":" + std::to_string(line_no) +
                                      ": duplicate movie id " + std::to_string(raw_id));
            GenreVector genres(genre_count, 0);
            const size_t first_flag = fields.size() - genre_count;
            for (size_t g = 0; g < genre_count; ++g) {
                const std::string& flag = fields[first_flag + g];
                if (flag == "1")
                    genres[g] = 1;
                else if (flag != "0")
                    throw ParseError(name, line_no, "genre flag must be 0 or 1, got \"" + flag + "\"");
            }
            const int32_t dense = static_cast<int32_t>(ds.item_raw_ids.size());
            ds.item_id_map.emplace(raw_id, dense);
            ds.item_raw_ids.push_back(raw_id);
            ds.item_genres.push_back(std::move(genres));
        }
    }

    // u.user: id | age | gender | occupation | zip (zip discarded).
    {
        const auto path = data_dir / "u.user";
        std::ifstream in = open_or_throw(path);
        const std::string name = path.string();
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            line = strip_cr(line);
            if (line.empty()) continue;
            const auto fields = split(line, '|');
            if (fields.size() != 5)
                throw ParseError(name, line_no,
                                 "expected 5 fields, got " + std::to_string(fields.size()));
            const int64_t raw_id = parse_int(fields[0], name, line_no, "user id");
            if (ds.user_id_map.count(raw_id))
                throw ValidationError(name + ":" + std::to_string(line_no) +
                                      ": duplicate user id " + std::to_string(raw_id));
            const int64_t age = parse_int(fields[1], name, line_no, "age");
            if (fields[2].size() != 1 || (fields[2][0] != 'M' && fields[2][0] != 'F'))
                throw ValidationError(name + ":" + std::to_string(line_no) +
                                      ": gender must be M or F, got \"" + fields[2] + "\"");
            DemographicVector demo;
            demo.age_group = encode_age(static_cast<int>(age));
            demo.gender = encode_gender(fields[2][0]);
            try {
                demo.occupation = encode_occupation(fields[3], ds.occupation_vocab);
            } catch (const ValidationError& e) {
                throw ValidationError(name + ":" + std::to_string(line_no) + ": " + e.what());
            }
            const int32_t dense = static_cast<int32_t>(ds.user_raw_ids.size());
            ds.user_id_map.emplace(raw_id, dense);
            ds.user_raw_ids.push_back(raw_id);
            ds.user_demographics.push_back(std::move(demo));
        }
    }

    ds.num_users = static_cast<int32_t>(ds.user_raw_ids.size());
    ds.num_items = static_cast<int32_t>(ds.item_raw_ids.size());

    ds.triples = parse_ratings_file(data_dir / "u.data", "\t", ds);
    check_unique_pairs(ds.triples, (data_dir / "u.data").string());

    if (ds.triples.empty() && ds.num_users == 0 && ds.num_items == 0)
        throw ValidationError(data_dir.string() + ": dataset is empty");
    return ds;
}

RatingDataset parse_1m(const std::filesystem::path& data_dir) {
    RatingDataset ds;
    ds.genre_names = k100kGenreOrder;
    ds.occupation_vocab = k1mOccupations;

    // movies.dat: MovieID::Title::Genres (genres |-joined names).
    {
        const auto path = data_dir / "movies.dat";
        std::ifstream in = open_or_throw(path);
        const std::string name = path.string();
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            line = strip_cr(line);
            if (line.empty()) continue;
            const auto fields = split(line, std::string("::"));
            if (fields.size() != 3)
                throw ParseError(name, line_no,
                                 "expected 3 ::-separated fields, got " +
                                     std::to_string(fields.size()));
            const int64_t raw_id = parse_int(fields[0], name, line_no, "movie id");
            if (ds.item_id_map.count(raw_id))
                throw ValidationError(name + ":" + std::to_string(line_no) +
                                      ": duplicate movie id " + std::to_string(raw_id));
            std::vector<int> genre_idx;
            if (!fields[2].empty()) {
                for (const auto& genre : split(fields[2], '|')) {
                    if (genre.empty()) continue;
                    auto it = std::find(ds.genre_names.begin(), ds.genre_names.end(), genre);
                    if (it == ds.genre_names.end()) {
                        ds.genre_names.push_back(genre);
                        it = ds.genre_names.end() - 1;
                    }
                    genre_idx.push_back(static_cast<int>(it - ds.genre_names.begin()));
                }
            }
            const int32_t dense = static_cast<int32_t>(ds.item_raw_ids.size());
            ds.item_id_map.emplace(raw_id, dense);
            ds.item_raw_ids.push_back(raw_id);
            // Vocabulary may still grow; store indices, materialize below.
            ds.item_genres.emplace_back();
            ds.item_genres.back().assign(genre_idx.begin(), genre_idx.end());
        }
        // Materialize multi-hot vectors now that G is final.
        const size_t genre_count = ds.genre_names.size();
        for (auto& stored : ds.item_genres) {
            GenreVector flags(genre_count, 0);
            bool any = false;
            for (uint8_t idx : stored) {
                flags[idx] = 1;
                any = true;
            }
            if (!any) flags[0] = 1; // no genre listed -> "unknown"
            stored = std::move(flags);
        }
    }

    // users.dat: UserID::Gender::Age::Occupation::Zip.
    {
        const auto path = data_dir / "users.dat";
        std::ifstream in = open_or_throw(path);
        const std::string name = path.string();
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            line = strip_cr(line);
            if (line.empty()) continue;
            const auto fields = split(line, std::string("::"));
            if (fields.size() != 5)
                throw ParseError(name, line_no,
                                 "expected 5 ::-separated fields, got " +
                                     std::to_string(fields.size()));
            const int64_t raw_id = parse_int(fields[0], name, line_no, "user id");
            if (ds.user_id_map.count(raw_id))
                throw ValidationError(name + ":" + std::to_string(line_no) +
                                      ": duplicate user id " + std::to_string(raw_id));
            if (fields[1].size() != 1 || (fields[1][0] != 'M' && fields[1][0] != 'F'))
                throw ValidationError(name + ":" + std::to_string(line_no) +
                                      ": gender must be M or F, got \"" + fields[1] + "\"");
            const int64_t age_code = parse_int(fields[2], name, line_no, "age code");
            const int64_t occ_code = parse_int(fields[3], name, line_no, "occupation code");
            if (occ_code < 0 || occ_code >= static_cast<int64_t>(ds.occupation_vocab.size()))
                throw ValidationError(name + ":" + std::to_string(line_no) +
                                      ": occupation code " + std::to_string(occ_code) +
                                      " outside 0.." +
                                      std::to_string(ds.occupation_vocab.size() - 1));
            DemographicVector demo;
            demo.gender = encode_gender(fields[1][0]);
            demo.age_group = encode_age(age_group_midpoint_years(static_cast<int>(age_code)));
            demo.occupation.assign(ds.occupation_vocab.size(), 0);
            demo.occupation[occ_code] = 1;
            const int32_t dense = static_cast<int32_t>(ds.user_raw_ids.size());
            ds.user_id_map.emplace(raw_id, dense);
            ds.user_raw_ids.push_back(raw_id);
            ds.user_demographics.push_back(std::move(demo));
        }
    }

    ds.num_users = static_cast<int32_t>(ds.user_raw_ids.size());
    ds.num_items = static_cast<int32_t>(ds.item_raw_ids.size());

    ds.triples = parse_ratings_file(data_dir / "ratings.dat", "::", ds);
    check_unique_pairs(ds.triples, (data_dir / "ratings.dat").string());

    if (ds.triples.empty() && ds.num_users == 0 && ds.num_items == 0)
        throw ValidationError(data_dir.string() + ": dataset is empty");
    return ds;
}

int age_group_midpoint_years(int code_1m) {
    // 1M age codes name ranges; the midpoint picks one of the 8 groups.
    switch (code_1m) {
        case 1: return 9;   // under 18
        case 18: return 21; // 18-24
        case 25: return 29; // 25-34
        case 35: return 39; // 35-44
        case 45: return 47; // 45-49
        case 50: return 52; // 50-55
        case 56: return 64; // 56+
        default: return code_1m; // plain age, clamp handled by encode_age
    }
}

std::vector<FoldSplit> load_standard_folds_100k(const std::filesystem::path& data_dir) {
    const RatingDataset full = parse_100k(data_dir);
    std::vector<FoldSplit> folds;
    for (int fold = 1; fold <= 5; ++fold) {
        const auto base_path = data_dir / ("u" + std::to_string(fold) + ".base");
        const auto test_path = data_dir / ("u" + std::to_string(fold) + ".test");
        if (!std::filesystem::exists(base_path) || !std::filesystem::exists(test_path))
            throw ValidationError("fold " + std::to_string(fold) + ": missing " +
                                  base_path.string() + " or " + test_path.string());
        FoldSplit split;
        split.fold_index = fold;
        split.train = with_triples(full, parse_ratings_file(base_path, "\t", full));
        split.test = with_triples(full, parse_ratings_file(test_path, "\t", full));
        check_unique_pairs(split.train.triples, base_path.string());
        check_unique_pairs(split.test.triples, test_path.string());

        // train and test must partition the full rating set
        std::vector<RatingTriple> joint = split.train.triples;
        joint.insert(joint.end(), split.test.triples.begin(), split.test.triples.end());
        check_unique_pairs(joint, "fold " + std::to_string(fold) +
                                      " (train/test overlap)");
        if (joint.size() != full.triples.size())
            throw ValidationError("fold " + std::to_string(fold) + ": |train|+|test| = " +
                                  std::to_string(joint.size()) + " but full dataset has " +
                                  std::to_string(full.triples.size()) + " ratings");
        folds.push_back(std::move(split));
    }
    return folds;
}

std::vector<FoldSplit> make_folds(const RatingDataset& dataset, int n_folds, uint64_t seed) {
    if (n_folds < 2) throw ValidationError("make_folds: n_folds must be >= 2");
    const size_t n = dataset.triples.size();
    if (n == 0) throw ValidationError("make_folds: dataset has no ratings");
    if (static_cast<size_t>(n_folds) > n)
        throw ValidationError("make_folds: more folds than ratings");

    std::vector<uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(Rng::mix(seed, 0x666f6c6473ULL)); // "folds"
    rng.shuffle(std::span<uint32_t>(perm));

    // Contiguous slices of the shuffled order become the test folds; the
    // first n % n_folds folds absorb the remainder.
    std::vector<int> fold_of(n);
    size_t offset = 0;
    for (int f = 0; f < n_folds; ++f) {
        const size_t size = n / n_folds + (static_cast<size_t>(f) < n % n_folds ? 1 : 0);
        for (size_t i = 0; i < size; ++i) fold_of[perm[offset + i]] = f;
        offset += size;
    }

    std::vector<FoldSplit> folds(n_folds);
    for (int f = 0; f < n_folds; ++f) {
        std::vector<RatingTriple> train, test;
        for (size_t i = 0; i < n; ++i) {
            (fold_of[i] == f ? test : train).push_back(dataset.triples[i]);
        }
        folds[f].fold_index = f + 1;
        folds[f].train = with_triples(dataset, std::move(train));
        folds[f].test = with_triples(dataset, std::move(test));
    }
    return folds;
}

uint64_t dataset_checksum(const RatingDataset& dataset) {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](int64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<uint8_t>(v >> (8 * b));
            h *= 0x100000001b3ULL;
        }
    };
    feed(dataset.num_users);
    feed(dataset.num_items);
    feed(static_cast<int64_t>(dataset.triples.size()));
    for (const auto& t : dataset.triples) {
        feed(t.user_id);
        feed(t.item_id);
        feed(t.rating);
        feed(t.timestamp);
    }
    return h;
}

} // namespace lcrbm
