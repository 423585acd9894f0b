#include <doctest.h>

#include <algorithm>
#include <set>

#include "fazseg/morphology.hpp"
#include "oracles.hpp"

using namespace fazseg;
using namespace fazseg::testing;

namespace {

BinaryMask single(const Geometry& g, int x, int y)
{
    BinaryMask m(g);
    m.set(x, y);
    return m;
}

// Direct definitions, iterating over SE offsets per output pixel.
BinaryMask brute_dilate(const BinaryMask& m, const StructuringElement& se)
{
    BinaryMask out(m.geometry());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            for (const auto& o : se.offsets())
                if (m.test_or_background(x - o.dx, y - o.dy))
                    out.set(x, y);
    return out;
}

BinaryMask brute_erode(const BinaryMask& m, const StructuringElement& se)
{
    BinaryMask out(m.geometry());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool all = true;
            for (const auto& o : se.offsets())
                all = all && m.test_or_background(x + o.dx, y + o.dy);
            out.set(x, y, all);
        }
    return out;
}

bool subset(const BinaryMask& a, const BinaryMask& b)
{
    return mask_difference(a, b).empty();
}

int neighbours8(const BinaryMask& m, int x, int y)
{
    int n = 0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            if ((dx || dy) && m.test_or_background(x + dx, y + dy))
                ++n;
    return n;
}

std::pair<int, int> topology(const BinaryMask& m)
{
    return {flood_component_count(m, true), flood_component_count(complement(m), false)};
}

// Every pixel of a solid 2x2 block is needed for topology (a junction), so none could be
// thinned away.
bool one_pixel_wide(const BinaryMask& m)
{
    const auto before = topology(m);
    for (int y = 0; y + 1 < m.height(); ++y)
        for (int x = 0; x + 1 < m.width(); ++x) {
            if (!(m.test(x, y) && m.test(x + 1, y) && m.test(x, y + 1) && m.test(x + 1, y + 1)))
                continue;
            for (int k = 0; k < 4; ++k) {
                BinaryMask probe = m;
                probe.set(x + k % 2, y + k / 2, false);
                if (topology(probe) == before)
                    return false;
            }
        }
    return true;
}

} // namespace

TEST_CASE("structuring element shapes")
{
    const auto h = StructuringElement::line(5, 0);
    CHECK(h.offsets().size() == 5);
    for (const auto& o : h.offsets())
        CHECK(o.dy == 0);
    const auto v = StructuringElement::line(5, 90);
    std::set<Offset> hv, vv;
    for (const auto& o : h.offsets())
        hv.insert({o.dy, o.dx});
    for (const auto& o : v.offsets())
        vv.insert(o);
    CHECK(hv == vv);
    const auto d = StructuringElement::line(5, 45);
    std::set<Offset> dv(d.offsets().begin(), d.offsets().end());
    std::set<Offset> expected;
    for (int k = -2; k <= 2; ++k)
        expected.insert({k, -k});
    CHECK(dv == expected);
    CHECK(StructuringElement::line(6, 0).length() == 7);
    CHECK(StructuringElement::line(6, 0).offsets().size() == 7);

    for (int r = 1; r <= 6; ++r) {
        const auto disk = StructuringElement::disk(r);
        std::size_t expect = 0;
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx)
                expect += dx * dx + dy * dy <= r * r;
        CHECK(disk.offsets().size() == expect);
        CHECK(std::count(disk.offsets().begin(), disk.offsets().end(), Offset{0, 0}) == 1);
    }
    CHECK_THROWS_AS(StructuringElement::line(5, 30), PreconditionError);
    CHECK_THROWS_AS(StructuringElement::disk(0), PreconditionError);
}

TEST_CASE("dilation examples")
{
    const auto g = frame(21, 21);
    const auto d = dilate(single(g, 10, 10), StructuringElement::line(5, 0));
    CHECK(d == rect_mask(g, 8, 10, 5, 1));
    CHECK(dilate(BinaryMask(g), StructuringElement::disk(3)).empty());
    CHECK(dilate(single(g, 10, 10), StructuringElement::disk(2)).count() == 13);
}

TEST_CASE("erosion examples")
{
    const auto g = frame(9, 9);
    CHECK(erode(rect_mask(g, 2, 2, 5, 5), StructuringElement::disk(1)) ==
          rect_mask(g, 3, 3, 3, 3));
    CHECK(erode(BinaryMask(g, true), StructuringElement::disk(1)) == rect_mask(g, 1, 1, 7, 7));
}

TEST_CASE("dilate and erode match their definitions")
{
    Rng rng(21);
    const StructuringElement ses[] = {
        StructuringElement::line(1, 0),  StructuringElement::line(5, 0),
        StructuringElement::line(7, 45), StructuringElement::line(9, 90),
        StructuringElement::disk(1),     StructuringElement::disk(3),
    };
    for (int t = 0; t < 60; ++t) {
        const auto m = random_mask(rng, rng.integer(3, 30), rng.integer(3, 30),
                                   rng.uniform(0.05, 0.9));
        for (const auto& se : ses) {
            REQUIRE(dilate(m, se) == brute_dilate(m, se));
            REQUIRE(erode(m, se) == brute_erode(m, se));
        }
    }
}

TEST_CASE("closing is extensive and idempotent away from the frame border")
{
    // Erosion reads out-of-frame as background, so support stays 4 px inside the frame.
    Rng rng(5);
    for (int t = 0; t < 40; ++t) {
        const auto inner = random_mask(rng, 16, 16, rng.uniform(0.05, 0.5));
        const auto m = embed(inner, frame(24, 24), 4, 4);
        for (const auto& se : {StructuringElement::disk(2), StructuringElement::line(5, 45)}) {
            const auto closed = erode(dilate(m, se), se);
            CHECK(subset(m, closed));
            CHECK(erode(dilate(closed, se), se) == closed);
        }
    }
}

TEST_CASE("erosion and dilation are dual on interior-supported masks")
{
    Rng rng(9);
    for (int t = 0; t < 40; ++t) {
        const int w = 30, h = 30, r = 3;
        // Support and its complement structure stay away from the border.
        BinaryMask m(frame(w, h));
        for (int y = 2 * r; y < h - 2 * r; ++y)
            for (int x = 2 * r; x < w - 2 * r; ++x)
                m.set(x, y, rng.uniform() < 0.7);
        const auto se = StructuringElement::disk(r);
        const auto lhs = erode(m, se);
        const auto rhs = complement(dilate(complement(m), se.reflected()));
        for (int y = r; y < h - r; ++y)
            for (int x = r; x < w - r; ++x)
                REQUIRE(lhs.test(x, y) == rhs.test(x, y));
    }
}

TEST_CASE("connected component examples")
{
    const auto g = frame(9, 5);
    const auto two = mask_union(rect_mask(g, 0, 0, 3, 3), rect_mask(g, 4, 0, 3, 3));
    const auto c = connected_components(two, Connectivity::four);
    REQUIRE(c.size() == 2);
    CHECK(c[0].area_px == 9);
    CHECK(c[1].area_px == 9);
    CHECK(c[0].label == 1);
    CHECK(c[0].centroid.x == doctest::Approx(1.5));

    BinaryMask diag(frame(5, 5));
    for (int i = 0; i < 5; ++i)
        diag.set(i, i);
    CHECK(connected_components(diag, Connectivity::eight).size() == 1);
    CHECK(connected_components(diag, Connectivity::four).size() == 5);

    BinaryMask checker(frame(4, 4));
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            checker.set(x, y, (x + y) % 2 == 0);
    const auto cc = connected_components(checker, Connectivity::four);
    CHECK(cc.size() == 8);
    for (const auto& comp : cc)
        CHECK(comp.area_px == 1);
}

TEST_CASE("components partition the mask and follow raster order")
{
    Rng rng(17);
    for (int t = 0; t < 200; ++t) {
        const auto m = random_mask(rng, rng.integer(1, 32), rng.integer(1, 32),
                                   rng.uniform(0.1, 0.8));
        for (auto conn : {Connectivity::four, Connectivity::eight}) {
            const auto comps = connected_components(m, conn);
            REQUIRE(static_cast<int>(comps.size()) ==
                    flood_component_count(m, conn == Connectivity::eight));
            std::size_t total = 0;
            BinaryMask seen(m.geometry());
            PointI prev{-1, -1};
            for (const auto& c : comps) {
                total += c.area_px;
                CHECK(c.pixels.size() == c.area_px);
                for (const auto& p : c.pixels) {
                    REQUIRE_FALSE(seen.test(p.x, p.y));
                    seen.set(p.x, p.y);
                }
                const PointI first = *std::min_element(
                    c.pixels.begin(), c.pixels.end(), [](PointI a, PointI b) {
                        return std::tie(a.y, a.x) < std::tie(b.y, b.x);
                    });
                CHECK(std::tie(prev.y, prev.x) < std::tie(first.y, first.x));
                prev = first;
            }
            CHECK(total == m.count());
            CHECK(seen == m);
        }
    }
}

TEST_CASE("fill holes examples")
{
    const auto g = frame(12, 12);
    const auto ring = mask_difference(rect_mask(g, 2, 2, 8, 8), rect_mask(g, 3, 3, 6, 6));
    CHECK(fill_holes(ring) == rect_mask(g, 2, 2, 8, 8));
    const auto bar = rect_mask(g, 0, 4, 12, 2);
    CHECK(fill_holes(bar) == bar);
    const auto outer = mask_difference(rect_mask(g, 0, 0, 12, 12), rect_mask(g, 1, 1, 10, 10));
    const auto inner = mask_difference(rect_mask(g, 3, 3, 6, 6), rect_mask(g, 4, 4, 4, 4));
    CHECK(fill_holes(mask_union(outer, inner)) == BinaryMask(g, true));
}

TEST_CASE("fill holes matches the border flood oracle")
{
    Rng rng(23);
    for (int t = 0; t < 500; ++t) {
        const auto m = random_mask(rng, rng.integer(1, 32), rng.integer(1, 32),
                                   rng.uniform(0.2, 0.8));
        REQUIRE(fill_holes(m) == border_flood_fill(m));
    }
}

TEST_CASE("distance transform examples")
{
    const auto g = frame(21, 21);
    const auto sq = rect_mask(g, 5, 5, 11, 11);
    const auto d = distance_transform(sq);
    const double mx = *std::max_element(d.data().begin(), d.data().end());
    CHECK(mx == 6.0);
    CHECK(d(10, 10) == 6.0);
    CHECK(distance_transform(single(g, 4, 4))(4, 4) == 1.0);
    const auto zero = distance_transform(BinaryMask(g));
    for (double v : zero.data())
        CHECK(v == 0.0);
    CHECK_THROWS_AS(distance_transform(BinaryMask(g, true)), PreconditionError);
}

TEST_CASE("distance transform equals brute force")
{
    Rng rng(1000);
    for (int t = 0; t < 300; ++t) {
        auto m = random_mask(rng, rng.integer(1, 32), rng.integer(1, 32),
                             rng.uniform(0.3, 0.99));
        if (m.count() == m.size())
            m.set(0, 0, false);
        REQUIRE(distance_transform(m) == brute_distance(m));
    }
}

TEST_CASE("skeleton of a bar is a centred line")
{
    const auto g = frame(110, 9);
    const auto s = skeletonize(rect_mask(g, 5, 3, 100, 3));
    CHECK(s.count() >= 98);
    CHECK(s.count() <= 102);
    for (int x = 8; x < 102; ++x)
        CHECK(s.test(x, 4));
    CHECK(one_pixel_wide(s));
    CHECK(connected_components(s, Connectivity::eight).size() == 1);
}

TEST_CASE("skeleton of a single pixel and of a disk")
{
    const auto g = frame(31, 31);
    CHECK(skeletonize(single(g, 7, 9)) == single(g, 7, 9));
    const auto s = skeletonize(disk_mask(g, 15.5, 15.5, 10));
    CHECK(s.count() >= 1);
    CHECK(s.count() <= 4);
    CHECK(connected_components(s, Connectivity::eight).size() == 1);
}

TEST_CASE("skeleton properties on random blobs")
{
    Rng rng(31);
    for (int t = 0; t < 60; ++t) {
        // Closed random masks are blob-like rather than salt noise.
        const auto raw = random_mask(rng, 40, 40, rng.uniform(0.05, 0.25));
        const auto m = erode(dilate(raw, StructuringElement::disk(2)), StructuringElement::disk(1));
        const auto s = skeletonize(m);
        CHECK(subset(s, m));
        CHECK(skeletonize(s) == s);
        CHECK(one_pixel_wide(s));
        CHECK(connected_components(s, Connectivity::eight).size() ==
              connected_components(m, Connectivity::eight).size());
        // Holes are kept: background component count is unchanged.
        CHECK(connected_components(complement(s), Connectivity::four).size() ==
              connected_components(complement(m), Connectivity::four).size());
        std::size_t isolated = 0;
        for (int y = 0; y < s.height(); ++y)
            for (int x = 0; x < s.width(); ++x)
                isolated += s.test(x, y) && neighbours8(s, x, y) == 0;
        CHECK(isolated <= connected_components(m, Connectivity::eight).size());
    }
}

TEST_CASE("inner boundary")
{
    const auto g = frame(10, 10);
    const auto b = inner_boundary(rect_mask(g, 2, 2, 5, 5));
    CHECK(b.count() == 16);
    CHECK_FALSE(b.test(4, 4));
}
