#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sys/wait.h>

#include "corstitch/error.hpp"
#include "corstitch/manifest.hpp"
#include "corstitch/pipeline.hpp"
#include "corstitch/synth.hpp"
#include "corstitch/zip.hpp"
#include "util.hpp"

using namespace corstitch;

namespace {

SurveyParams small() {
    SurveyParams p;
    p.frame_count = 75;
    p.frame_rows = 64;
    p.frame_cols = 96;
    p.texture_rows = 256;
    p.texture_cols = 256;
    p.strip_fraction = 0.5;
    return p;
}

PipelineConfig config_for(const std::filesystem::path& survey, const std::filesystem::path& out) {
    PipelineConfig c;
    c.frames_dir = survey / "frames";
    c.gps_csv = survey / "gps.csv";
    c.out_dir = out;
    c.mosaic_time = 1.0;
    c.strip_fraction = 0.5;
    c.batch_size = 2;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CORSTITCH_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("full pipeline on disk") {
    testutil::TempDir tmp("pipe");
    const auto survey = generate_survey(8, small());
    write_survey(survey, tmp.path() / "reef_a", "png", 2);
    auto cfg = config_for(tmp.path() / "reef_a", tmp.path() / "out");
    cfg.threads = 3;

    const auto summary = run_pipeline(cfg);
    CHECK(summary.frames_in == 75);
    CHECK(summary.accepted == 74);
    CHECK(summary.mosaics == 3);
    CHECK(summary.archives == 2);
    REQUIRE(summary.archive_paths.size() == 2);
    CHECK(summary.archive_paths[0].filename() == "transect_reef_a_batch_000.kmz");

    const auto records = read_manifest(cfg.out_dir / kManifestFile);
    REQUIRE(records.size() == 3);
    CHECK(records[0].first_frame == 1);
    CHECK(records[0].last_frame == 29);
    CHECK(records[1].first_frame == 30);
    CHECK(records[0].height == 32 + 4 * 29);
    CHECK(records[0].start_time == 0.0);
    CHECK(records[0].end_time == doctest::Approx(29.0 / 30.0));

    // mosaic png: rotated so the newest rows are at the top
    const auto png = read_image(cfg.out_dir / records[0].image);
    CHECK(png.rows == records[0].height);
    const auto first = survey.render_frame(0);
    const auto top = strip_geometry(64, 0.5).top;
    for (std::size_t c = 0; c < 96; c += 11)
        CHECK(png.at(png.rows - 1, 95 - c)[1] == first.pixels->at(top, c)[1]);

    const auto members = read_zip(summary.archive_paths[1]);
    REQUIRE(members.size() == 2);
    CHECK(members[0].name == "doc.kml");
    CHECK(members[1].name == "files/mosaic_00002.png");
    CHECK(std::string(members[1].data.begin(), members[1].data.end()) == slurp(cfg.out_dir / records[2].image));
}

TEST_CASE("georef resumes from the manifest") {
    testutil::TempDir tmp("resume");
    write_survey(generate_survey(8, small()), tmp.path() / "s", "ppm");
    const auto cfg = config_for(tmp.path() / "s", tmp.path() / "out");
    run_pipeline(cfg);
    const auto quads = slurp(cfg.out_dir / kQuadsFile);
    const auto kmz = slurp(cfg.out_dir / "kmz" / "transect_s_batch_000.kmz");
    std::filesystem::remove_all(cfg.out_dir / "kmz");
    run_georef(cfg);
    CHECK(slurp(cfg.out_dir / kQuadsFile) == quads);
    CHECK(slurp(cfg.out_dir / "kmz" / "transect_s_batch_000.kmz") == kmz);
}

TEST_CASE("manifest version mismatch") {
    testutil::TempDir tmp("manifest");
    std::ofstream(tmp.path() / "manifest.jsonl") << R"({"format":"corstitch-manifest","version":99})" << '\n';
    CHECK_THROWS_AS(read_manifest(tmp.path() / "manifest.jsonl"), Error);
}

TEST_CASE("GPS coverage gap is a georef error") {
    testutil::TempDir tmp("gap");
    write_survey(generate_survey(8, small()), tmp.path() / "s", "ppm");
    auto cfg = config_for(tmp.path() / "s", tmp.path() / "out");
    cfg.epoch_offset = 10.0;  // pushes frame times past the last fix
    try {
        run_pipeline(cfg);
        FAIL("expected georef failure");
    } catch (const Error& e) {
        CHECK(e.stage() == Stage::georef);
    }
}

TEST_CASE("cli exit codes") {
    testutil::TempDir tmp("cli");
    const auto dir = tmp.path().string();
    CHECK(run_cli("") == 1);
    CHECK(run_cli("run --frames " + dir + "/missing --gps " + dir + "/missing.csv --out " + dir + "/o") == 2);
    CHECK(run_cli("synth --out " + dir + "/s --frame-count 40 --frame-width 96 --frame-height 64 "
                  "--texture-size 256 --strip-fraction 0.5 --shift-dy -20") == 7);
    REQUIRE(run_cli("synth --out " + dir + "/s --frame-count 40 --frame-width 96 --frame-height 64 "
                    "--texture-size 256 --strip-fraction 0.5 --format ppm") == 0);
    CHECK(run_cli("verify --frames " + dir + "/s/frames --min-rate 1.0") == 0);
    CHECK(run_cli("stitch --frames " + dir + "/s/frames --out " + dir + "/o --strip-fraction 0.5") == 0);
    CHECK(run_cli("georef --gps " + dir + "/s/gps.csv --out " + dir + "/o --epoch-offset 100") == 5);
    CHECK(run_cli("georef --gps " + dir + "/s/gps.csv --out " + dir + "/o --offset-mode paper") == 0);

    std::ofstream(tmp.path() / "cfg.ini") << "frames = " << dir << "/s/frames\ngps = " << dir
                                          << "/s/gps.csv\nout = " << dir << "/o2\nstrip-fraction = 0.5\n";
    CHECK(run_cli("run --config " + dir + "/cfg.ini") == 0);
    CHECK(std::filesystem::exists(tmp.path() / "o2" / "kmz" / "transect_s_batch_000.kmz"));
}
