#include "fixtures.hpp"

#include <fstream>
#include <numeric>
#include <vector>

#include "lcrbm/rng.hpp"

namespace fixtures {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    out << content;
}

} // namespace

std::filesystem::path write_tiny_100k(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "u.genre",
               "unknown|0\n"
               "Action|1\n"
               "Comedy|2\n"
               "Drama|3\n");
    write_file(dir / "u.item",
               "1|Alpha (1994)|01-Jan-1994||http://x|0|1|0|0\n"
               "2|Beta (1995)|01-Jan-1995||http://x|0|0|1|0\n"
               "3|Gamma (1996)|01-Jan-1996||http://x|0|0|1|1\n"
               "4|Delta (1997)|01-Jan-1997||http://x|0|1|0|0\n"
               "5|Epsilon (1998)|01-Jan-1998||http://x|1|0|0|0\n");
    write_file(dir / "u.occupation",
               "engineer\n"
               "student\n"
               "artist\n");
    write_file(dir / "u.user",
               "1|24|M|engineer|55414\n"
               "2|53|F|student|55105\n"
               "3|14|M|artist|29206\n"
               "4|66|F|engineer|10960\n");
    write_file(dir / "u.data",
               "1\t1\t5\t874965758\n"
               "1\t2\t3\t876893171\n"
               "1\t3\t4\t878542960\n"
               "2\t1\t4\t888550871\n"
               "2\t2\t1\t888551341\n"
               "2\t4\t2\t888550871\n"
               "3\t2\t5\t877888877\n"
               "3\t3\t4\t880587853\n"
               "3\t5\t3\t891350625\n"
               "4\t1\t2\t879270459\n"
               "4\t4\t5\t879270459\n"
               "4\t5\t1\t879270459\n");
    return dir;
}

std::filesystem::path write_tiny_1m(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "movies.dat",
               "1::Alpha (1994)::Action\n"
               "2::Beta (1995)::Comedy\n"
               "3::Gamma (1996)::Comedy|Drama\n"
               "4::Delta (1997)::Action\n"
               "5::Epsilon (1998)::unknown\n");
    write_file(dir / "users.dat",
               "1::M::25::12::55414\n"
               "2::F::50::4::55105\n"
               "3::M::1::2::29206\n"
               "4::F::56::17::10960\n");
    write_file(dir / "ratings.dat",
               "1::1::5::874965758\n"
               "1::2::3::876893171\n"
               "1::3::4::878542960\n"
               "2::1::4::888550871\n"
               "2::2::1::888551341\n"
               "2::4::2::888550871\n"
               "3::2::5::877888877\n"
               "3::3::4::880587853\n"
               "3::5::3::891350625\n"
               "4::1::2::879270459\n"
               "4::4::5::879270459\n"
               "4::5::1::879270459\n");
    return dir;
}

std::filesystem::path write_synthetic_100k(const std::filesystem::path& dir,
                                           const SyntheticConfig& synth) {
    std::filesystem::create_directories(dir);
    lcrbm::Rng rng(lcrbm::Rng::mix(synth.seed, 0x73796eULL)); // "syn"

    const std::vector<std::string> genres = {"unknown", "Action", "Comedy",
                                             "Drama",   "Thriller", "Romance"};
    {
        std::string text;
        for (size_t g = 0; g < genres.size(); ++g)
            text += genres[g] + "|" + std::to_string(g) + "\n";
        write_file(dir / "u.genre", text);
    }

    // items: cluster c = i % 4 decides the primary genre flag
    std::vector<int> cluster(synth.items);
    {
        std::string text;
        for (int i = 0; i < synth.items; ++i) {
            cluster[i] = i % 4;
            std::vector<int> flags(genres.size(), 0);
            flags[cluster[i] + 1] = 1;
            if (rng.uniform() < 0.3) flags[(cluster[i] + 2) % 4 + 1] = 1;
            text += std::to_string(i + 1) + "|Item " + std::to_string(i + 1) +
                    " (1995)|01-Jan-1995||http://x";
            for (int f : flags) text += "|" + std::to_string(f);
            text += "\n";
        }
        write_file(dir / "u.item", text);
    }

    write_file(dir / "u.occupation", "engineer\nstudent\nartist\n");

    // users: taste group g = u % 3, demographics correlated with the group
    std::vector<int> group(synth.users);
    {
        const std::string occupations[3] = {"engineer", "student", "artist"};
        std::string text;
        for (int u = 0; u < synth.users; ++u) {
            group[u] = u % 3;
            const int occ = rng.uniform() < 0.8 ? group[u] : rng.uniform_int(3);
            int age = 0;
            switch (group[u]) {
                case 0: age = 18 + rng.uniform_int(6); break;
                case 1: age = 30 + rng.uniform_int(6); break;
                default: age = 50 + rng.uniform_int(6); break;
            }
            const char gender = rng.bernoulli(0.5) ? 'M' : 'F';
            text += std::to_string(u + 1) + "|" + std::to_string(age) + "|" + gender +
                    "|" + occupations[occ] + "|00000\n";
        }
        write_file(dir / "u.user", text);
    }

    // ratings: group-cluster affinity plus noise, clamped to 1..5
    static const double affinity[3][4] = {{4.5, 3.5, 2.0, 3.0},
                                          {2.0, 4.5, 3.5, 2.5},
                                          {3.0, 2.0, 4.5, 4.0}};
    struct Row {
        int user, item, rating;
        int64_t ts;
    };
    std::vector<Row> rows;
    std::vector<uint32_t> items(synth.items);
    std::iota(items.begin(), items.end(), 0);
    int64_t ts = 880000000;
    for (int u = 0; u < synth.users; ++u) {
        rng.shuffle(std::span<uint32_t>(items));
        const int count = std::min(synth.ratings_per_user, synth.items);
        for (int r = 0; r < count; ++r) {
            const int i = static_cast<int>(items[r]);
            const double value = affinity[group[u]][cluster[i]] + rng.normal() * 0.7;
            const int rating = std::max(1, std::min(5, static_cast<int>(value + 0.5)));
            rows.push_back({u + 1, i + 1, rating, ts++});
        }
    }
    {
        std::string text;
        for (const auto& row : rows)
            text += std::to_string(row.user) + "\t" + std::to_string(row.item) + "\t" +
                    std::to_string(row.rating) + "\t" + std::to_string(row.ts) + "\n";
        write_file(dir / "u.data", text);
    }

    if (synth.standard_folds) {
        std::vector<uint32_t> order(rows.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span<uint32_t>(order));
        std::vector<int> fold_of(rows.size());
        const size_t n = rows.size();
        size_t offset = 0;
        for (int f = 0; f < 5; ++f) {
            const size_t size = n / 5 + (static_cast<size_t>(f) < n % 5 ? 1 : 0);
            for (size_t i = 0; i < size; ++i) fold_of[order[offset + i]] = f;
            offset += size;
        }
        for (int f = 0; f < 5; ++f) {
            std::string base_text, test_text;
            for (size_t r = 0; r < rows.size(); ++r) {
                const auto& row = rows[r];
                const std::string line = std::to_string(row.user) + "\t" +
                                         std::to_string(row.item) + "\t" +
                                         std::to_string(row.rating) + "\t" +
                                         std::to_string(row.ts) + "\n";
                (fold_of[r] == f ? test_text : base_text) += line;
            }
            write_file(dir / ("u" + std::to_string(f + 1) + ".base"), base_text);
            write_file(dir / ("u" + std::to_string(f + 1) + ".test"), test_text);
        }
    }
    return dir;
}

} // namespace fixtures
