#include "doctest.h"
#include "support.hpp"

#include "rolefocus/service.hpp"

#include "httplib.h"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace rolefocus;
using namespace testsupport;
using codec::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream(p, std::ios::binary) << s;
}

struct Workdir {
    fs::path dir;
    Workdir() {
        dir = fs::temp_directory_path() / ("rolefocus_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Workdir() { fs::remove_all(dir); }
    fs::path operator/(const std::string& name) const { return dir / name; }
};

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

Run cli(const Workdir& wd, const std::string& args) {
    const fs::path out = wd / "stdout.txt", err = wd / "stderr.txt";
    const std::string cmd = quote(ROLEFOCUS_CLI) + " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string corpus_jsonl(const json& items, bool with_ids) {
    std::string s;
    for (auto item : items) {
        if (!with_ids) item.erase("request_id");
        s += item.dump() + "\n";
    }
    return s;
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("parse: long transcripts lint clean") {
    Workdir wd;
    json a{{"character_id", "cake"}, {"raw_output", kCakeOutput}, {"gold", codec::to_json(cake_gold())}};
    json b{{"character_id", "xiaoming"}, {"raw_output", kXiaomingOutput}, {"gold", codec::to_json(xiaoming_gold())}};
    spit(wd / "c.jsonl", a.dump() + "\n" + b.dump() + "\n");
    auto r = cli(wd, "parse " + quote((wd / "c.jsonl").string()));
    CHECK(r.code == 0);
    CHECK(r.out.find("2 records") != std::string::npos);
    CHECK(r.out.find("AnswerNotBoxed") != std::string::npos);
    r = cli(wd, "parse --strict " + quote((wd / "c.jsonl").string()));
    CHECK(r.code == 0);
}

TEST_CASE("parse: strict mode fails on a malformed trace") {
    Workdir wd;
    json bad{{"raw_output", "<think>unterminated"}};
    json good{{"raw_output", "<think>x</think>\\boxed{y}"}};
    spit(wd / "c.jsonl", good.dump() + "\n" + bad.dump() + "\n");
    CHECK(cli(wd, "parse " + quote((wd / "c.jsonl").string())).code == 0);
    CHECK(cli(wd, "parse --strict " + quote((wd / "c.jsonl").string())).code == 1);
}

TEST_CASE("parse: empty file and bad lines") {
    Workdir wd;
    spit(wd / "empty.jsonl", "");
    auto r = cli(wd, "parse " + quote((wd / "empty.jsonl").string()));
    CHECK(r.code == 0);
    CHECK(r.out.find("0 records") != std::string::npos);

    spit(wd / "broken.jsonl", "{\"raw_output\": \"<think>a</think>b\"}\n{oops\n");
    r = cli(wd, "parse " + quote((wd / "broken.jsonl").string()));
    CHECK(r.code == 0);
    CHECK(r.err.find(":2:") != std::string::npos);
    CHECK(cli(wd, "parse --strict " + quote((wd / "broken.jsonl").string())).code == 1);
    CHECK(cli(wd, "parse " + quote((wd / "missing.jsonl").string())).code == 2);
}

TEST_CASE("score: output equals the service on the same corpus and state") {
    Workdir wd;
    const json items = corpus_items(60);
    spit(wd / "corpus.jsonl", corpus_jsonl(items, true));
    spit(wd / "model.json", codec::to_json(corpus_model()).dump());

    ScoringService svc{ServiceConfig{}};
    svc.install_model(corpus_model());
    svc.score(json{{"items", corpus_items(30)}, {"update_stats", true}}.dump());
    spit(wd / "stats.json", svc.stats_snapshot());

    for (bool update : {false, true}) {
        const std::string args = "score " + quote((wd / "corpus.jsonl").string()) + " --groups " +
                                 quote((wd / "model.json").string()) + " --stats-in " + quote((wd / "stats.json").string()) +
                                 (update ? " --update --stats-out " + quote((wd / "stats_out.json").string()) : "") +
                                 " --out " + quote((wd / "scored.jsonl").string());
        const auto r = cli(wd, args);
        REQUIRE(r.code == 0);

        ScoringService fresh{ServiceConfig{}};
        fresh.install_model(corpus_model());
        fresh.restore_stats(slurp(wd / "stats.json"));
        const auto reply = json::parse(fresh.score(json{{"items", items}, {"update_stats", update}}.dump()).body);

        std::istringstream lines(slurp(wd / "scored.jsonl"));
        std::string line;
        std::size_t i = 0;
        for (; std::getline(lines, line); ++i) {
            REQUIRE(i < reply["items"].size());
            CHECK(json::parse(line) == reply["items"][i]);
        }
        CHECK(i == items.size());
        if (update) CHECK(slurp(wd / "stats_out.json") == fresh.stats_snapshot());
    }
}

TEST_CASE("score: repeated --update passes see moved stats") {
    Workdir wd;
    spit(wd / "corpus.jsonl", corpus_jsonl(corpus_items(24), false));
    spit(wd / "model.json", codec::to_json(corpus_model()).dump());
    const std::string base = "score " + quote((wd / "corpus.jsonl").string()) + " --groups " + quote((wd / "model.json").string()) + " --update";
    REQUIRE(cli(wd, base + " --stats-out " + quote((wd / "s1.json").string()) + " --out " + quote((wd / "o1.jsonl").string())).code == 0);
    REQUIRE(cli(wd, base + " --stats-in " + quote((wd / "s1.json").string()) + " --stats-out " + quote((wd / "s2.json").string()) +
                        " --out " + quote((wd / "o2.jsonl").string()))
                .code == 0);
    const std::string first = slurp(wd / "o1.jsonl"), second = slurp(wd / "o2.jsonl");
    CHECK(count_lines(first) == 24);
    CHECK(first != second);
    CHECK(json::parse(first.substr(0, first.find('\n')))["request_id"] == "1");
    CHECK(json::parse(first.substr(0, first.find('\n')))["normalized"] !=
          json::parse(second.substr(0, second.find('\n')))["normalized"]);
}

TEST_CASE("score: missing group model is a usage error") {
    Workdir wd;
    spit(wd / "corpus.jsonl", corpus_jsonl(corpus_items(2), true));
    CHECK(cli(wd, "score " + quote((wd / "corpus.jsonl").string())).code == 2);
    CHECK(cli(wd, "score " + quote((wd / "corpus.jsonl").string()) + " --groups " + quote((wd / "nope.json").string())).code == 2);
}

TEST_CASE("fit-groups") {
    Workdir wd;
    const auto blobs = three_blobs(11);
    std::string lines;
    for (const auto& p : blobs.profiles) lines += codec::to_json(p).dump() + "\n";
    spit(wd / "profiles.jsonl", lines);
    const std::string profiles = quote((wd / "profiles.jsonl").string());

    auto r = cli(wd, "fit-groups " + profiles + " --sweep 2..6");
    REQUIRE(r.code == 0);
    std::istringstream table(r.out);
    std::string row;
    std::getline(table, row);
    CHECK(row == "G,inertia,silhouette");
    std::size_t best_g = 0;
    double best = -2;
    while (std::getline(table, row)) {
        const auto c1 = row.find(','), c2 = row.rfind(',');
        const double s = std::stod(row.substr(c2 + 1));
        if (s > best) {
            best = s;
            best_g = std::stoul(row.substr(0, c1));
        }
    }
    CHECK(best_g == 3);

    r = cli(wd, "fit-groups " + profiles + " --out " + quote((wd / "model.json").string()));
    REQUIRE(r.code == 0);
    const auto model = codec::group_model_from_json(json::parse(slurp(wd / "model.json")));
    CHECK(model.cluster_count == 7);

    CHECK(cli(wd, "fit-groups " + profiles + " --G 0").code == 2);
    CHECK(cli(wd, "fit-groups " + profiles + " --sweep 5..2").code == 2);
    CHECK(cli(wd, "fit-groups " + profiles + " --G 500").code == 2);
}

TEST_CASE("train-toy") {
    Workdir wd;
    auto r = cli(wd, "train-toy --steps 40 --out " + quote((wd / "a.csv").string()));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("r_focus=") != std::string::npos);
    CHECK(count_lines(slurp(wd / "a.csv")) == 41);
    REQUIRE(cli(wd, "train-toy --steps 40 --out " + quote((wd / "b.csv").string())).code == 0);
    CHECK(slurp(wd / "a.csv") == slurp(wd / "b.csv"));
    REQUIRE(cli(wd, "train-toy --steps 40 --seed 99 --out " + quote((wd / "c.csv").string())).code == 0);
    CHECK(slurp(wd / "a.csv") != slurp(wd / "c.csv"));

    r = cli(wd, "train-toy --steps 0 --out " + quote((wd / "z.csv").string()));
    REQUIRE(r.code == 0);
    CHECK(slurp(wd / "z.csv") == "step,r_focus,r_attr,r_ref,r_scalar,objective\n");
    CHECK(r.out.find("steps=0") != std::string::npos);

    spit(wd / "task.json", to_json(default_toy_task()).dump());
    REQUIRE(cli(wd, quote("train-toy") + " " + quote((wd / "task.json").string()) + " --steps 40 --out " + quote((wd / "d.csv").string())).code == 0);
    CHECK(slurp(wd / "d.csv") == slurp(wd / "a.csv"));

    CHECK(cli(wd, "train-toy --steps -3").code == 2);
}

TEST_CASE("serve: bad config key names the key") {
    Workdir wd;
    spit(wd / "cfg.json", R"({"port": 0, "learning_rate": 3})");
    const auto r = cli(wd, "serve --config " + quote((wd / "cfg.json").string()));
    CHECK(r.code == 2);
    CHECK(r.err.find("learning_rate") != std::string::npos);
}

TEST_CASE("serve: health, SIGTERM and snapshot on exit") {
    Workdir wd;
    const fs::path snap = wd / "snap.json";
    spit(wd / "cfg.json", json{{"port", 0}, {"snapshot_path", snap.string()}}.dump());

    int err_pipe[2];
    REQUIRE(::pipe(err_pipe) == 0);
    const pid_t pid = ::fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        ::dup2(err_pipe[1], 2);
        ::close(err_pipe[0]);
        const std::string cfg = (wd / "cfg.json").string();
        ::execl(ROLEFOCUS_CLI, ROLEFOCUS_CLI, "serve", "--config", cfg.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(err_pipe[1]);

    std::string banner;
    char c;
    while (::read(err_pipe[0], &c, 1) == 1 && c != '\n') banner += c;
    const auto colon = banner.rfind(':');
    REQUIRE(colon != std::string::npos);
    const int port = std::stoi(banner.substr(colon + 1));

    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);
    REQUIRE(client.Post("/v1/groups/model", codec::to_json(corpus_model()).dump(), "application/json"));
    auto scored = client.Post("/v1/score", json{{"items", corpus_items(8)}, {"update_stats", true}}.dump(), "application/json");
    REQUIRE(scored);
    CHECK(scored->status == 200);
    const std::string live = client.Get("/v1/stats")->body;

    ::kill(pid, SIGTERM);
    int status = 0;
    ::waitpid(pid, &status, 0);
    ::close(err_pipe[0]);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    REQUIRE(fs::exists(snap));
    CHECK(slurp(snap) == live);

    ScoringService again{ServiceConfig{}};
    CHECK(again.restore_stats(slurp(snap)).status == 200);
    CHECK(again.stats_snapshot() == live);
}

TEST_CASE("usage errors") {
    Workdir wd;
    CHECK(cli(wd, "").code == 2);
    CHECK(cli(wd, "frobnicate").code == 2);
    CHECK(cli(wd, "--help").code == 0);
}
