#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "orbitdet/eval.hpp"
#include "oracles.hpp"

using namespace orbitdet;

namespace {

DetectionRecord det(std::string image, int cls, float score, BBox box) {
    DetectionRecord r;
    r.image = std::move(image);
    r.det = {cls, score, box};
    return r;
}

GroundTruth gt(std::string image, int cls, BBox box) { return {std::move(image), cls, box}; }

}  // namespace

TEST_CASE("match_detections hand cases") {
    const std::vector<GroundTruth> gts = {gt("img", 0, {10, 10, 20, 20})};

    const auto exact = match_detections({det("img", 0, 0.9f, {10, 10, 20, 20})}, gts, 0.5);
    CHECK(exact == std::vector<bool>{true});

    // two detections on one ground truth: only the first (higher score) is TP
    const auto dup = match_detections(
        {det("img", 0, 0.9f, {10, 10, 20, 20}), det("img", 0, 0.8f, {11, 11, 20, 20})}, gts, 0.5);
    CHECK(dup == std::vector<bool>{true, false});

    // IoU 0.4 against a 0.5 threshold is a miss: 20x20 boxes offset by 10 in y
    // overlap 10x20 = 200, union 600
    const auto low = match_detections({det("img", 0, 0.9f, {10, 20, 20, 20})}, gts, 0.5);
    CHECK(iou(BBox{10, 20, 20, 20}, gts[0].bbox) == doctest::Approx(200.0 / 600.0));
    CHECK(low == std::vector<bool>{false});

    // same class, different image: no match
    const auto cross = match_detections({det("other", 0, 0.9f, {10, 10, 20, 20})}, gts, 0.5);
    CHECK(cross == std::vector<bool>{false});
}

TEST_CASE("average precision hand-computed curves") {
    CHECK(average_precision({true}, 1) == doctest::Approx(1.0));
    CHECK(average_precision({true, false}, 2) == doctest::Approx(0.5));
    CHECK(average_precision({false, true}, 1) == doctest::Approx(0.5));
    CHECK(average_precision({}, 3) == 0.0);
    CHECK(average_precision({false, false}, 2) == 0.0);
    // [TP, FP, TP], 2 gt: envelope gives 0.5*1 + 0.5*(2/3)
    CHECK(average_precision({true, false, true}, 2) == doctest::Approx(0.5 + 0.5 * (2.0 / 3.0)));
}

TEST_CASE("mean AP") {
    CHECK(mean_ap({{0, 1.0}}) == doctest::Approx(1.0));
    CHECK(mean_ap({{0, 0.0}, {1, 1.0}}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(mean_ap({}), DomainError);
}

TEST_CASE("evaluate: perfect detections score 1.0 everywhere") {
    std::vector<GroundTruth> gts;
    std::vector<DetectionRecord> dets;
    std::mt19937 rng(31);
    std::uniform_real_distribution<float> coord(0.0f, 300.0f), size(10.0f, 60.0f);
    for (int i = 0; i < 30; ++i) {
        const BBox b{coord(rng), coord(rng), size(rng), size(rng)};
        const int cls = i % 3;
        const std::string image = "img" + std::to_string(i % 5);
        gts.push_back(gt(image, cls, b));
        dets.push_back(det(image, cls, 1.0f, b));
    }
    const EvalReport r = evaluate(dets, gts, 0.5);
    CHECK(r.map == doctest::Approx(1.0));
    for (const auto& [cls, ap] : r.per_class_ap) CHECK(ap == doctest::Approx(1.0));
}

TEST_CASE("evaluate: empty detections score 0, missing classes are excluded") {
    const std::vector<GroundTruth> gts = {gt("a", 0, {0, 0, 10, 10}), gt("a", 2, {20, 20, 10, 10})};
    const EvalReport r = evaluate({}, gts, 0.5);
    CHECK(r.map == 0.0);
    CHECK(r.per_class_ap.size() == 2);

    // detections of a class with no ground truth do not create an AP entry
    const EvalReport r2 = evaluate({det("a", 7, 0.9f, {0, 0, 10, 10})}, gts, 0.5);
    CHECK(r2.per_class_ap.count(7) == 0);
    CHECK(r2.per_class_ap.size() == 2);

    CHECK_THROWS_AS(evaluate({}, {}, 0.5), DomainError);
}

TEST_CASE("AP depends only on score ranks") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<float> coord(0.0f, 200.0f), size(10.0f, 50.0f), sc(0.01f, 0.99f);
    std::vector<GroundTruth> gts;
    std::vector<DetectionRecord> dets;
    for (int i = 0; i < 20; ++i) {
        const BBox b{coord(rng), coord(rng), size(rng), size(rng)};
        gts.push_back(gt("img", i % 2, b));
        BBox jittered = b;
        jittered.x += 2.0f;
        dets.push_back(det("img", i % 2, sc(rng), jittered));
    }
    const EvalReport base = evaluate(dets, gts, 0.5);

    std::vector<DetectionRecord> rescaled = dets;
    for (auto& d : rescaled) d.det.score = 0.37f * d.det.score + 0.005f;  // strictly monotone
    const EvalReport scaled = evaluate(rescaled, gts, 0.5);
    CHECK(scaled.map == doctest::Approx(base.map).epsilon(1e-12));
    for (const auto& [cls, ap] : base.per_class_ap)
        CHECK(scaled.per_class_ap.at(cls) == doctest::Approx(ap).epsilon(1e-12));
}

TEST_CASE("appending a lowest-score FP never increases AP") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<float> coord(0.0f, 200.0f), size(10.0f, 50.0f), sc(0.3f, 0.99f);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<GroundTruth> gts;
        std::vector<DetectionRecord> dets;
        const int n = std::uniform_int_distribution<int>(1, 6)(rng);
        for (int i = 0; i < n; ++i) {
            const BBox b{coord(rng), coord(rng), size(rng), size(rng)};
            gts.push_back(gt("img", 0, b));
            if (std::uniform_int_distribution<int>(0, 2)(rng) != 0)
                dets.push_back(det("img", 0, sc(rng), b));
        }
        const double before = evaluate(dets, gts, 0.5).map;
        dets.push_back(det("img", 0, 0.001f, {900.0f, 900.0f, 5.0f, 5.0f}));  // far-away FP
        const double after = evaluate(dets, gts, 0.5).map;
        CHECK(after <= before + 1e-12);
    }
}

TEST_CASE("duplicated detections become FPs and drag AP down") {
    const std::vector<GroundTruth> gts = {gt("a", 0, {0, 0, 10, 10}), gt("a", 0, {50, 50, 10, 10})};
    const std::vector<DetectionRecord> dets = {det("a", 0, 0.9f, {0, 0, 10, 10}),
                                               det("a", 0, 0.7f, {50, 50, 10, 10})};
    std::vector<DetectionRecord> doubled = dets;
    doubled.insert(doubled.end(), dets.begin(), dets.end());

    CHECK(evaluate(dets, gts, 0.5).map == doctest::Approx(1.0));
    // duplicates rank as [TP, FP, TP, FP]: a duplicate FP lands before the
    // second TP and caps the envelope there at 2/3
    CHECK(evaluate(doubled, gts, 0.5).map == doctest::Approx(0.5 + 0.5 * (2.0 / 3.0)));
}

TEST_CASE("evaluate matches the exhaustive oracle on random small scenes") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<float> coord(0.0f, 60.0f), size(5.0f, 30.0f), sc(0.01f, 0.99f);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<GroundTruth> gts;
        std::vector<DetectionRecord> dets;
        const int ng = std::uniform_int_distribution<int>(1, 4)(rng);
        const int nd = std::uniform_int_distribution<int>(0, 4)(rng);
        for (int i = 0; i < ng; ++i)
            gts.push_back(gt("img" + std::to_string(i % 2),
                             std::uniform_int_distribution<int>(0, 1)(rng),
                             {coord(rng), coord(rng), size(rng), size(rng)}));
        for (int i = 0; i < nd; ++i)
            dets.push_back(det("img" + std::to_string(i % 2),
                               std::uniform_int_distribution<int>(0, 1)(rng), sc(rng),
                               {coord(rng), coord(rng), size(rng), size(rng)}));

        const EvalReport got = evaluate(dets, gts, 0.5);
        const auto want = oracle::ap_ref_all(dets, gts, 0.5);
        REQUIRE(got.per_class_ap.size() == want.size());
        for (const auto& [cls, ap] : want)
            CHECK(got.per_class_ap.at(cls) == doctest::Approx(ap).epsilon(1e-12));
    }
}
