#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "talkdet/proposals.hpp"
#include "testutil.hpp"

using namespace talkdet;
using namespace talkdet::proposals;
namespace fs = std::filesystem;

namespace {

BoxAnnotation box_at(const std::string& person, int frame, int x = 0, int y = 0, int w = 10, int h = 10) {
    return BoxAnnotation{frame, person, x, y, w, h, "head"};
}

PersonTrack contiguous_track(const std::string& person, int first, int last) {
    PersonTrack t;
    t.person_id = person;
    for (int f = first; f <= last; ++f) t.boxes.push_back(box_at(person, f));
    return t;
}

// Independent window enumerator: split the index list into maximal runs,
// then chop each run into 3*fps windows from its start.
std::vector<std::pair<int, int>> oracle_windows(const std::vector<int>& frames, int fps) {
    std::vector<std::pair<int, int>> out;
    size_t i = 0;
    while (i < frames.size()) {
        size_t j = i;
        while (j + 1 < frames.size() && frames[j + 1] == frames[j] + 1) ++j;
        int len = static_cast<int>(j - i + 1);
        for (int k = 0; k + 3 * fps <= len; k += 3 * fps)
            out.push_back({frames[i + k], frames[i + k] + 3 * fps - 1});
        i = j + 1;
    }
    return out;
}

} // namespace

TEST(Tracks, GroupsAndSorts) {
    std::vector<BoxAnnotation> anns{box_at("Issac", 0), box_at("Issac", 1), box_at("Issac", 2)};
    std::vector<PersonTrack> tracks = group_tracks(anns);
    ASSERT_EQ(tracks.size(), 1u);
    EXPECT_EQ(tracks[0].person_id, "Issac");
    EXPECT_EQ(tracks[0].boxes.size(), 3u);

    std::vector<BoxAnnotation> mixed{box_at("b", 5), box_at("a", 2), box_at("b", 3), box_at("a", 0)};
    tracks = group_tracks(mixed);
    ASSERT_EQ(tracks.size(), 2u);
    EXPECT_EQ(tracks[0].person_id, "a");
    EXPECT_EQ(tracks[0].boxes[0].frame_index, 0);
    EXPECT_EQ(tracks[0].boxes[1].frame_index, 2);
    EXPECT_EQ(tracks[1].boxes[0].frame_index, 3);
    EXPECT_EQ(tracks[1].boxes[1].frame_index, 5);
}

TEST(Tracks, DuplicateRejectedWithNames) {
    std::vector<BoxAnnotation> anns{box_at("p1", 4), box_at("p1", 4)};
    try {
        group_tracks(anns);
        FAIL() << "expected duplicate error";
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("p1"), std::string::npos);
        EXPECT_NE(msg.find("4"), std::string::npos);
    }
}

TEST(Windows, ContiguousAt30Fps) {
    PersonTrack t = contiguous_track("p", 0, 199);
    std::vector<ClipProposal> clips = window_clips(t, 30);
    ASSERT_EQ(clips.size(), 2u);
    EXPECT_EQ(clips[0].start_frame, 0);
    EXPECT_EQ(clips[0].end_frame, 89);
    EXPECT_EQ(clips[1].start_frame, 90);
    EXPECT_EQ(clips[1].end_frame, 179);
}

TEST(Windows, SingleWindowAt60Fps) {
    PersonTrack t = contiguous_track("p", 0, 179);
    std::vector<ClipProposal> clips = window_clips(t, 60);
    ASSERT_EQ(clips.size(), 1u);
    EXPECT_EQ(clips[0].start_frame, 0);
    EXPECT_EQ(clips[0].end_frame, 179);
}

TEST(Windows, GapRestartsRuns) {
    PersonTrack t;
    t.person_id = "p";
    for (int f = 0; f <= 199; ++f)
        if (f != 50) t.boxes.push_back(box_at("p", f));
    std::vector<ClipProposal> clips = window_clips(t, 30);
    ASSERT_EQ(clips.size(), 1u);
    EXPECT_EQ(clips[0].start_frame, 51);
    EXPECT_EQ(clips[0].end_frame, 140);
}

TEST(Windows, MatchesEnumerationOracle) {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const int fps = 1 + static_cast<int>(rng() % 5);
        PersonTrack t;
        t.person_id = "p";
        std::vector<int> frames;
        int f = static_cast<int>(rng() % 4);
        const int total = static_cast<int>(rng() % 120);
        for (int i = 0; i < total; ++i) {
            frames.push_back(f);
            f += (rng() % 10 == 0) ? 2 + static_cast<int>(rng() % 5) : 1;
        }
        for (int fr : frames) t.boxes.push_back(box_at("p", fr));
        std::vector<std::pair<int, int>> want = oracle_windows(frames, fps);
        std::vector<ClipProposal> got = window_clips(t, fps);
        ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
        for (size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].start_frame, want[i].first);
            EXPECT_EQ(got[i].end_frame, want[i].second);
            EXPECT_EQ(got[i].end_frame - got[i].start_frame + 1, 3 * fps);
            EXPECT_EQ(got[i].crop_box.frame_index, got[i].start_frame);
            if (i > 0) { EXPECT_GT(got[i].start_frame, got[i - 1].end_frame); }
        }
    }
}

TEST(Windows, EmptyTrackYieldsNothing) {
    PersonTrack t;
    t.person_id = "p";
    EXPECT_TRUE(window_clips(t, 30).empty());
    EXPECT_THROW(window_clips(t, 0), ValidationError);
}

namespace {

struct ClipFixture {
    fs::path dir;
    media::FrameManifest manifest;

    ClipFixture(int frames, int fps, bool jitter) {
        dir = fs::temp_directory_path() / ("talkdet_prop_" + std::to_string(::getpid()) + "_" + std::to_string(rand()));
        fs::create_directories(dir);
        GrayFrame base = testutil::periodic_texture(120, 110, 9);
        for (int i = 0; i < frames; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%06d.pgm", i);
            netpbm::write_pgm8(base, (dir / name).string());
        }
        nlohmann::json j{{"root_path", "."}, {"width", 120}, {"height", 110},
                         {"frame_count", frames}, {"fps", fps},  {"color", "gray8"}};
        std::ofstream(dir / "manifest.json") << j.dump();
        manifest = media::load_frame_sequence((dir / "manifest.json").string());
        (void)jitter;
    }
    ~ClipFixture() { fs::remove_all(dir); }
};

} // namespace

TEST(ExtractClip, StackSizeAndIdentity) {
    ClipFixture fx(90, 30, false);
    PersonTrack t = contiguous_track("p", 0, 89);
    for (BoxAnnotation& b : t.boxes) {
        b.x = 5;
        b.y = 5;
        b.w = 100;
        b.h = 100;
    }
    std::vector<ClipProposal> clips = window_clips(t, 30);
    ASSERT_EQ(clips.size(), 1u);
    ClipStack stack = extract_clip(fx.manifest, clips[0]);
    ASSERT_EQ(stack.frames.size(), 90u);
    GrayFrame first = media::read_frame_gray(fx.manifest, 0);
    for (const GrayFrame& f : stack.frames) {
        ASSERT_EQ(f.width, 100);
        ASSERT_EQ(f.height, 100);
        for (int y = 0; y < 100; ++y)
            for (int x = 0; x < 100; ++x) ASSERT_EQ(f.at(x, y), first.at(5 + x, 5 + y));
    }
}

TEST(ExtractClip, JitterInOtherFramesIsIgnored) {
    ClipFixture fx(90, 30, true);
    PersonTrack steady = contiguous_track("p", 0, 89);
    PersonTrack jittered = steady;
    std::mt19937 rng(3);
    for (size_t i = 1; i < jittered.boxes.size(); ++i) {
        jittered.boxes[i].x = static_cast<int>(rng() % 15);
        jittered.boxes[i].y = static_cast<int>(rng() % 9);
    }
    for (PersonTrack* t : {&steady, &jittered}) {
        t->boxes[0].x = 5;
        t->boxes[0].y = 7;
        t->boxes[0].w = 60;
        t->boxes[0].h = 50;
    }
    ClipStack a = extract_clip(fx.manifest, window_clips(steady, 30)[0]);
    ClipStack b = extract_clip(fx.manifest, window_clips(jittered, 30)[0]);
    ASSERT_EQ(a.frames.size(), b.frames.size());
    for (size_t i = 0; i < a.frames.size(); ++i)
        for (size_t j = 0; j < a.frames[i].data.size(); ++j) ASSERT_EQ(a.frames[i].data[j], b.frames[i].data[j]);
}

TEST(ExtractClip, MissingFrameNamed) {
    ClipFixture fx(90, 30, false);
    fs::remove(fx.dir / "frame_000042.pgm");
    PersonTrack t = contiguous_track("p", 0, 89);
    try {
        extract_clip(fx.manifest, window_clips(t, 30)[0]);
        FAIL() << "expected missing-frame error";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("42"), std::string::npos) << e.what();
    }
}
