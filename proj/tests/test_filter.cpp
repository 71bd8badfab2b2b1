#include <doctest.h>

#include <stdexcept>

#include "adsrnote/rng.hpp"
#include "adsrnote/segment_filter.hpp"
#include "adsrnote/simulator.hpp"

using namespace adsrnote;

TEST_SUITE_BEGIN("segment_filter");

namespace {

// Segment N..A0 A1 D0 D1 S S..: start 2, end 8 on one key.
NoteSegment canonical_segment(int key) {
  NoteSegment seg;
  seg.key = key;
  seg.start_frame = 2;
  seg.end_frame = 8;
  seg.reached_s = true;
  seg.states = {AdsrState::A0, AdsrState::A1, AdsrState::D0,
                AdsrState::D1, AdsrState::S,  AdsrState::S};
  return seg;
}

ActivationMatrix acts_with(int key, float attack_on, float sustain_int) {
  ActivationMatrix acts(12, 50.0);
  acts.at(2, key, kOnsetStream) = attack_on;
  acts.at(3, key, kOnsetStream) = attack_on;
  acts.at(5, key, kIntermediateStream) = sustain_int;
  acts.at(6, key, kIntermediateStream) = sustain_int;
  return acts;
}

}  // namespace

TEST_CASE("threshold comparison is inclusive") {
  const NoteSegment seg = canonical_segment(10);
  const ActivationMatrix acts = acts_with(10, 0.5f, 0.8f);
  CHECK(apply_filter(FilterRule{0.5}, seg, acts));
}

TEST_CASE("all-zero activations are discarded for positive theta") {
  const NoteSegment seg = canonical_segment(4);
  const ActivationMatrix acts(12, 50.0);
  CHECK(!apply_filter(FilterRule{0.1}, seg, acts));
}

TEST_CASE("both clauses are required") {
  const NoteSegment seg = canonical_segment(7);
  CHECK(!apply_filter(FilterRule{0.5}, seg, acts_with(7, 0.9f, 0.1f)));
  CHECK(!apply_filter(FilterRule{0.5}, seg, acts_with(7, 0.1f, 0.9f)));
  CHECK(apply_filter(FilterRule{0.5}, seg, acts_with(7, 0.9f, 0.9f)));
}

TEST_CASE("theta zero keeps every segment") {
  const NoteSegment seg = canonical_segment(0);
  CHECK(apply_filter(FilterRule{0.0}, seg, ActivationMatrix(12, 50.0)));
}

TEST_CASE("kept sets shrink as theta grows") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    ActivationMatrix acts(12, 50.0);
    for (float& v : acts.values) v = static_cast<float>(rng.uniform());
    const std::vector<NoteSegment> segments = {canonical_segment(3),
                                               canonical_segment(60)};
    double theta1 = rng.uniform(), theta2 = rng.uniform();
    if (theta1 > theta2) std::swap(theta1, theta2);
    const auto kept1 = filter_all(FilterRule{theta1}, segments, acts);
    const auto kept2 = filter_all(FilterRule{theta2}, segments, acts);
    CHECK(kept2.size() <= kept1.size());
    for (const NoteEvent& note : kept2) {
      CHECK(std::find(kept1.begin(), kept1.end(), note) != kept1.end());
    }
  }
}

TEST_CASE("frames outside [start, last S] are never inspected") {
  const NoteSegment seg = canonical_segment(20);
  ActivationMatrix acts = acts_with(20, 0.9f, 0.9f);
  const bool before = apply_filter(FilterRule{0.5}, seg, acts);

  // Scribble everywhere outside the segment's own frames.
  for (int t = 0; t < acts.frames; ++t) {
    if (t >= seg.start_frame && t < seg.end_frame) continue;
    for (int s = 0; s < kNumStreams; ++s) acts.at(t, 20, s) = 1.0f;
  }
  CHECK(apply_filter(FilterRule{0.5}, seg, acts) == before);

  // Discarding case stays discarded too.
  ActivationMatrix weak = acts_with(20, 0.2f, 0.2f);
  for (int t = 0; t < weak.frames; ++t) {
    if (t >= seg.start_frame && t < seg.end_frame) continue;
    for (int s = 0; s < kNumStreams; ++s) weak.at(t, 20, s) = 1.0f;
  }
  CHECK(!apply_filter(FilterRule{0.5}, seg, weak));
}

TEST_CASE("preconditions are enforced") {
  NoteSegment seg = canonical_segment(1);
  const ActivationMatrix acts(12, 50.0);

  NoteSegment no_s = seg;
  no_s.reached_s = false;
  CHECK_THROWS_AS(apply_filter(FilterRule{0.5}, no_s, acts),
                  std::invalid_argument);

  NoteSegment oob = seg;
  oob.end_frame = 40;
  CHECK_THROWS_AS(apply_filter(FilterRule{0.5}, oob, acts),
                  std::invalid_argument);

  CHECK_THROWS_AS(apply_filter(FilterRule{1.5}, seg, acts),
                  std::invalid_argument);
}

TEST_CASE("filter_all converts frames to seconds") {
  const NoteSegment seg = canonical_segment(30);
  const ActivationMatrix acts = acts_with(30, 0.9f, 0.9f);
  const auto notes = filter_all(FilterRule{0.5}, {seg}, acts);
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].start == 2 / 50.0);
  CHECK(notes[0].end == 8 / 50.0);
  CHECK(notes[0].key == 30);
}

TEST_SUITE_END();
