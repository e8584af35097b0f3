#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "talkdet/error.hpp"
#include "talkdet/image.hpp"
#include "talkdet/media.hpp"

// Turn per-frame head boxes into per-person 3-second clip proposals with a
// crop box frozen at the window's first frame, and extract 100x100
// grayscale stacks for each proposal.

namespace talkdet::proposals {

constexpr int kCropSize = 100;

struct PersonTrack {
    std::string person_id;
    std::vector<BoxAnnotation> boxes; // strictly increasing frame_index
};

struct ClipProposal {
    std::string person_id;
    int start_frame = 0;
    int end_frame = 0; // inclusive; end - start + 1 == 3 * fps
    BoxAnnotation crop_box;
    int fps = 0;
};

struct ClipStack {
    std::vector<GrayFrame> frames; // 3*fps frames, each kCropSize^2
};

inline std::vector<PersonTrack> group_tracks(const std::vector<BoxAnnotation>& annotations) {
    std::map<std::string, std::vector<BoxAnnotation>> by_person;
    for (const BoxAnnotation& a : annotations) by_person[a.person_id].push_back(a);
    std::vector<PersonTrack> tracks;
    for (auto& [person, boxes] : by_person) {
        std::stable_sort(boxes.begin(), boxes.end(),
                         [](const BoxAnnotation& a, const BoxAnnotation& b) { return a.frame_index < b.frame_index; });
        for (size_t i = 1; i < boxes.size(); ++i)
            if (boxes[i].frame_index == boxes[i - 1].frame_index)
                throw ValidationError("duplicate annotation for person '" + person + "' at frame " +
                                      std::to_string(boxes[i].frame_index));
        tracks.push_back(PersonTrack{person, std::move(boxes)});
    }
    return tracks;
}

inline std::vector<PersonTrack> load_head_tracks(const std::string& path) {
    return group_tracks(media::load_annotations(path));
}

// Consecutive non-overlapping 3-second windows over each maximal run of
// contiguous frame indices; trailing partials dropped; crop box frozen at
// the window's first frame.
inline std::vector<ClipProposal> window_clips(const PersonTrack& track, int fps) {
    if (fps <= 0) throw ValidationError("window_clips: fps must be > 0");
    const int win = 3 * fps;
    std::vector<ClipProposal> out;
    size_t run_start = 0;
    while (run_start < track.boxes.size()) {
        size_t run_end = run_start; // inclusive
        while (run_end + 1 < track.boxes.size() &&
               track.boxes[run_end + 1].frame_index == track.boxes[run_end].frame_index + 1)
            ++run_end;
        const size_t run_len = run_end - run_start + 1;
        for (size_t w0 = 0; w0 + win <= run_len; w0 += win) {
            const BoxAnnotation& first = track.boxes[run_start + w0];
            ClipProposal p;
            p.person_id = track.person_id;
            p.start_frame = first.frame_index;
            p.end_frame = first.frame_index + win - 1;
            p.crop_box = first;
            p.fps = fps;
            out.push_back(std::move(p));
        }
        run_start = run_end + 1;
    }
    return out;
}

inline ClipStack extract_clip(const media::FrameManifest& seq, const ClipProposal& proposal) {
    ClipStack stack;
    stack.frames.reserve(static_cast<size_t>(proposal.end_frame - proposal.start_frame + 1));
    for (int f = proposal.start_frame; f <= proposal.end_frame; ++f) {
        GrayFrame frame;
        try {
            frame = media::read_frame_gray(seq, f);
        } catch (const IoError& e) {
            throw IoError("extract_clip: frame " + std::to_string(f) + " for person '" + proposal.person_id +
                          "': " + e.what());
        }
        stack.frames.push_back(media::crop_resize(frame, proposal.crop_box, kCropSize, kCropSize));
    }
    return stack;
}

} // namespace talkdet::proposals
