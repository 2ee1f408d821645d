#include <doctest.h>

#include "optower/operad.hpp"
#include "testutil.hpp"

#include <memory>
#include <numeric>

using namespace ot;

namespace {

// oracles ------------------------------------------------------------------

// trees on r leaves, one symmetric binary vertex type: (2r-3)!!
long binaryTreeCount(int r) {
    long n = 1;
    for (int k = 2 * r - 3; k >= 1; k -= 2) n *= k;
    return n;
}

// trees on r labeled leaves over the regular binary generator: r! * Catalan(r-1)
long planarBinaryCount(int r) {
    long cat = 1;
    for (int i = 0; i < r - 1; i++) cat = cat * 2 * (2 * i + 1) / (i + 2);
    long f = 1;
    for (int i = 2; i <= r; i++) f *= i;
    return f * cat;
}

// trees on r labeled leaves with every vertex ternary: count partitions
// into three blocks recursively
long ternaryTreeCount(int r) {
    if (r == 1) return 1;
    if (r < 3) return 0;
    // choose the blocks of the root by multinomials over ordered sizes
    long total = 0;
    for (int a = 1; a <= r - 2; a++) {
        for (int b = 1; b <= r - a - 1; b++) {
            int c = r - a - b;
            long ways = 1;
            // multinomial r! / (a! b! c!)
            long fr = 1, fa = 1, fb = 1, fc = 1;
            for (int i = 2; i <= r; i++) fr *= i;
            for (int i = 2; i <= a; i++) fa *= i;
            for (int i = 2; i <= b; i++) fb *= i;
            for (int i = 2; i <= c; i++) fc *= i;
            ways = fr / (fa * fb * fc);
            total += ways * ternaryTreeCount(a) * ternaryTreeCount(b) * ternaryTreeCount(c);
        }
    }
    return total / 6;  // the three root blocks are unordered
}

long factorial(int n) {
    long f = 1;
    for (int i = 2; i <= n; i++) f *= i;
    return f;
}

// builders -----------------------------------------------------------------

SymSeq emptyGens(const Ring& R, int Rmax) {
    SymSeq A;
    A.ring = R;
    A.Rmax = Rmax;
    A.lev.assign(Rmax + 1, zeroComplex(R));
    for (int r = 0; r <= Rmax; r++) A.act.emplace_back(std::max(0, r - 1), DegMap{});
    return A;
}

// one binary generator with the trivial involution
SymSeq binaryGens(const Ring& R, int Rmax) {
    SymSeq A = emptyGens(R, Rmax);
    A.lev[2] = concentrated(R, 0, {"m"});
    A.act[2][0] = DegMap{{0, Mat::id(1)}};
    return A;
}

// the regular representation in arity 2: the involution swaps the basis
SymSeq regularBinaryGens(const Ring& R, int Rmax) {
    SymSeq A = emptyGens(R, Rmax);
    A.lev[2] = concentrated(R, 0, {"m", "m'"});
    Mat s(2, 2);
    s.set(0, 1, Q(1));
    s.set(1, 0, Q(1));
    A.act[2][0] = DegMap{{0, s}};
    return A;
}

// a binary generator pair a (degree 0), b (degree 1) with db = a
SymSeq dgBinaryGens(const Ring& R, int Rmax) {
    SymSeq A = emptyGens(R, Rmax);
    ChainComplex C;
    C.ring = R;
    C.bas[0] = {"a"};
    C.bas[1] = {"b"};
    Mat d(1, 1);
    d.set(0, 0, Q(1));
    C.setDiff(1, d);
    A.lev[2] = C;
    A.act[2][0] = DegMap{{0, Mat::id(1)}, {1, Mat::id(1)}};
    return A;
}

SymSeq ternaryGens(const Ring& R, int Rmax) {
    SymSeq A = emptyGens(R, Rmax);
    A.lev[3] = concentrated(R, 0, {"t"});
    A.act[3][0] = DegMap{{0, Mat::id(1)}};
    A.act[3][1] = DegMap{{0, Mat::id(1)}};
    return A;
}

int wordIndex(const Operad& O, int r, const std::string& label) {
    const auto& ls = O.level(r).bas.at(0);
    for (int i = 0; i < (int)ls.size(); i++)
        if (ls[i] == label) return i;
    FAIL("missing word " << label);
    return -1;
}

}  // namespace

TEST_CASE("composition keys enumerate ordered arity tuples") {
    CHECK(gammaKeys(1) == std::vector<std::vector<int>>{{1, 1}});
    // sum over totals s of 2^(s-1) ordered tuples
    for (int R = 2; R <= 6; R++) {
        long expect = 0;
        for (int s = 1; s <= R; s++) expect += 1L << (s - 1);
        CHECK((long)gammaKeys(R).size() == expect);
    }
    for (auto& key : gammaKeys(4)) {
        int total = std::accumulate(key.begin() + 1, key.end(), 0);
        CHECK(key[0] == (int)key.size() - 1);
        CHECK(total <= 4);
    }
}

TEST_CASE("block permutations move whole blocks") {
    // swapping blocks of sizes (2,1) carries 1,2,3 to 2,3,1
    CHECK(blockPermutation({2, 1}, {2, 1}) == std::vector<int>{2, 3, 1});
    CHECK(blockPermutation({2, 1}, {1, 2}) == std::vector<int>{3, 1, 2});
    CHECK(blockPermutation({1, 2, 3}, {2, 1, 2}) == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(blockPermutation({3, 1, 2}, {1, 1, 1}) == std::vector<int>{3, 1, 2});
}

TEST_CASE("associative operad: levels, unit, and hand compositions") {
    Operad As = presetAs(ringQ(), 4);
    for (int r = 1; r <= 4; r++) CHECK(As.level(r).dim(0) == factorial(r));
    CHECK(As.unitary1);
    CHECK(As.level(1).bas.at(0)[As.unitIdx] == "w1");

    // acting by the first transposition swaps the values 1 and 2
    {
        const Mat& a = As.seq.act[2][0].at(0);
        CHECK(a.get(wordIndex(As, 2, "w21"), wordIndex(As, 2, "w12")) == 1);
        CHECK(a.get(wordIndex(As, 2, "w12"), wordIndex(As, 2, "w21")) == 1);
    }

    // gamma((2,1); (1,2), (2,1)): the outer word visits block two first,
    // block two reads 4,3 and block one reads 1,2, so the result is 4312
    {
        std::vector<int> key = {2, 2, 2};
        const TensorComplex& src = As.sourceAt(key);
        long p = src.ix.indexOf(0, {0, 0, 0},
                                {wordIndex(As, 2, "w21"), wordIndex(As, 2, "w12"),
                                 wordIndex(As, 2, "w21")});
        const Mat& g = As.gammaAt(key).at(0);
        CHECK(g.c[p].size() == 1);
        CHECK(g.get(wordIndex(As, 4, "w4312"), (int)p) == 1);
    }
    // identity outer word concatenates the blocks in place
    {
        std::vector<int> key = {2, 1, 2};
        const TensorComplex& src = As.sourceAt(key);
        long p = src.ix.indexOf(0, {0, 0, 0},
                                {wordIndex(As, 2, "w12"), 0, wordIndex(As, 2, "w21")});
        const Mat& g = As.gammaAt(key).at(0);
        CHECK(g.get(wordIndex(As, 3, "w132"), (int)p) == 1);
    }

    checkOperadAxioms(As);
}

TEST_CASE("commutative operad satisfies the axioms through level 6") {
    Operad Com = presetCom(ringQ(), 6);
    for (int r = 1; r <= 6; r++) CHECK(Com.level(r).totalDim() == 1);
    checkOperadAxioms(Com);
}

TEST_CASE("axiom checker rejects corrupted structure") {
    // a wrong sign in one composition entry
    {
        Operad bad = presetAs(ringQ(), 3);
        Mat& g = bad.gam.at({2, 1, 1}).at(0);
        g.set(0, 0, -g.get(0, 0));
        CHECK_THROWS_WITH_AS(checkOperadAxioms(bad), doctest::Contains("[operad-axiom]"),
                             Error);
    }
    // a dropped composition map breaks the unit law
    {
        Operad bad = presetAs(ringQ(), 3);
        bad.gam.erase({1, 3});
        CHECK_THROWS_WITH_AS(checkOperadAxioms(bad), doctest::Contains("unit law"), Error);
    }
    // trivialized level actions are a valid symmetric sequence but break
    // equivariance of the composition
    {
        Operad bad = presetAs(ringQ(), 3);
        for (int r = 2; r <= 3; r++)
            for (auto& g : bad.seq.act[r]) g = degIdentity(bad.level(r));
        CHECK_THROWS_WITH_AS(checkOperadAxioms(bad), doctest::Contains("equivariance"),
                             Error);
    }
}

TEST_CASE("truncation kills high levels and keeps the axioms") {
    Operad As = presetAs(ringQ(), 4);
    Operad T = truncationOperad(As, 2);
    CHECK(T.level(1).dim(0) == 1);
    CHECK(T.level(2).dim(0) == 2);
    CHECK(T.level(3).totalDim() == 0);
    CHECK(T.level(4).totalDim() == 0);
    CHECK(T.gam.count({2, 1, 1}) == 1);
    CHECK(T.gam.count({1, 3}) == 0);
    CHECK(degIsZero(T.gammaAt({1, 3})));
    checkOperadAxioms(T);

    Operad T1 = truncationOperad(As, 1);
    CHECK(T1.level(2).totalDim() == 0);
    checkOperadAxioms(T1);
}

TEST_CASE("free operad on one symmetric binary generator") {
    Operad F = freeOperad(binaryGens(ringQ(), 5));
    CHECK(F.unitary1);
    CHECK(F.level(1).dim(0) == 1);
    for (int r = 2; r <= 5; r++) CHECK(F.level(r).dim(0) == binaryTreeCount(r));
    CHECK(F.level(3).dim(0) == 3);

    // the transposition of leaves 1,2 fixes ((L1 L2) L3) and swaps the
    // other two parenthesizations
    const auto& ls = F.level(3).bas.at(0);
    auto at = [&](const std::string& k) {
        for (int i = 0; i < (int)ls.size(); i++)
            if (ls[i] == k) return i;
        FAIL("missing tree " << k);
        return -1;
    };
    int t12 = at("((L1 L2)g2.0.0 L3)g2.0.0");
    int t13 = at("((L1 L3)g2.0.0 L2)g2.0.0");
    int t23 = at("(L1 (L2 L3)g2.0.0)g2.0.0");
    const Mat& s1 = F.seq.act[3][0].at(0);
    CHECK(s1.get(t12, t12) == 1);
    CHECK(s1.get(t23, t13) == 1);
    CHECK(s1.get(t13, t23) == 1);

    checkOperadAxioms(F);
}

TEST_CASE("free operad on the regular binary generator") {
    Operad F = freeOperad(regularBinaryGens(ringQ(), 4));
    for (int r = 2; r <= 4; r++) CHECK(F.level(r).dim(0) == planarBinaryCount(r));
    checkOperadAxioms(F);
}

TEST_CASE("free operad with a generator differential") {
    Operad F = freeOperad(dgBinaryGens(ringQ(), 4));
    // two vertex trees on three leaves: labels range over a, b twice
    CHECK(F.level(3).dim(0) == 3);
    CHECK(F.level(3).dim(1) == 6);
    CHECK(F.level(3).dim(2) == 3);
    // d(b circ b) hits both vertices; labels are ordered root first along
    // preorder, so the root term is unsigned and the inner one is not
    {
        const auto& ls2 = F.level(3).bas.at(2);
        const auto& ls1 = F.level(3).bas.at(1);
        auto at2 = [&](const std::string& k) {
            return (int)(std::find(ls2.begin(), ls2.end(), k) - ls2.begin());
        };
        auto at1 = [&](const std::string& k) {
            return (int)(std::find(ls1.begin(), ls1.end(), k) - ls1.begin());
        };
        int bb = at2("((L1 L2)g2.1.0 L3)g2.1.0");
        REQUIRE(bb < (int)ls2.size());
        const Mat& d = F.level(3).dmat(2);
        CHECK(d.get(at1("((L1 L2)g2.1.0 L3)g2.0.0"), bb) == 1);
        CHECK(d.get(at1("((L1 L2)g2.0.0 L3)g2.1.0"), bb) == -1);
    }
    checkOperadAxioms(F);
    for (int r = 2; r <= 4; r++) F.level(r).validate();
}

TEST_CASE("free operad needs generators in arities two and up") {
    SymSeq A = emptyGens(ringQ(), 3);
    A.lev[1] = concentrated(ringQ(), 0, {"u"});
    CHECK_THROWS_WITH_AS(freeOperad(A), doctest::Contains("arities >= 2"), Error);
}

TEST_CASE("free operad on a ternary generator") {
    Operad F = freeOperad(ternaryGens(ringQ(), 5));
    CHECK(F.level(2).totalDim() == 0);
    CHECK(F.level(3).dim(0) == ternaryTreeCount(3));
    CHECK(F.level(4).totalDim() == 0);
    CHECK(F.level(5).dim(0) == ternaryTreeCount(5));
    CHECK(F.level(5).dim(0) == 10);
    checkOperadAxioms(F);
}

TEST_CASE("thickened operad is an operad with a quasi isomorphism down") {
    auto As = std::make_shared<Operad>(presetAs(ringQ(), 3));
    Thickened th = thickenedOperad(As);
    const Operad& T = *th.op;
    CHECK_FALSE(T.unitary1);
    for (int r = 1; r <= 3; r++) {
        CHECK(T.level(r).dim(0) == factorial(r));
        CHECK(T.level(r).dim(1) == factorial(r));
        CHECK(T.level(r).dim(2) == factorial(r));
        // the acyclic factor contributes nothing to homology
        HomologyReport h = homology(T.level(r));
        CHECK(h.freeRank.at(0) == factorial(r));
        CHECK(h.trivialAt(1));
        CHECK(h.trivialAt(2));
    }
    checkOperadAxioms(T);
    checkOperadMap(th.aug);
}

TEST_CASE("algebra constructors enforce their contracts") {
    auto As = std::make_shared<Operad>(presetAs(ringQ(), 3));
    ChainComplex X = concentrated(ringQ(), 1, {"x"});

    Algebra triv = trivialAlgebra(As, X, "pt");
    checkAlgebra(triv);

    ChainComplex bad = concentrated(ringQ(), 0, {"x"});
    CHECK_THROWS_WITH_AS(trivialAlgebra(As, bad, "bad"),
                         doctest::Contains("degrees <= 0"), Error);
    CHECK_THROWS_WITH_AS(freeAlgebra(As, bad, "bad"), doctest::Contains("degrees <= 0"),
                         Error);

    auto th = thickenedOperad(As);
    CHECK_THROWS_WITH_AS(trivialAlgebra(th.op, X, "bad"), doctest::Contains("unitary"),
                         Error);
}

namespace {

/* The square zero algebra on x (degree 1) and xx (degree 2) over the
 * associative operad: the only nonzero product is x*x = xx, and w21 acts
 * with the Koszul sign of swapping two odd letters. */
std::map<int, DegMap> squareZeroAction(const Operad& As, const ChainComplex& X, Q sign21) {
    TensorComplex amb1 = tensorMany({&As.level(1), &X}, 1, 2);
    TensorComplex amb2 = tensorMany({&As.level(2), &X, &X}, 2, 4);
    std::map<int, DegMap> act;
    {
        DegMap a;
        for (auto& [n, ls] : X.bas) {
            Mat M((int)ls.size(), amb1.C.dim(n));
            for (int xi = 0; xi < (int)ls.size(); xi++)
                M.set(xi, (int)amb1.ix.indexOf(n, {0, n}, {0, xi}), Q(1));
            a[n] = M;
        }
        act[1] = a;
    }
    {
        Mat M(1, amb2.C.dim(2));  // target X_2 = <xx>
        M.set(0, (int)amb2.ix.indexOf(2, {0, 1, 1}, {0, 0, 0}), Q(1));
        M.set(0, (int)amb2.ix.indexOf(2, {0, 1, 1}, {1, 0, 0}), sign21);
        act[2] = DegMap{{2, M}};
    }
    return act;
}

}  // namespace

TEST_CASE("table algebras validate descent, unit, and associativity") {
    auto As = std::make_shared<Operad>(presetAs(ringQ(), 3));
    ChainComplex X;
    X.ring = ringQ();
    X.bas[1] = {"x"};
    X.bas[2] = {"xx"};

    // w21 = w12 * s, and s swaps two odd letters, so the sign is -1
    Algebra A = tableAlgebra(As, X, squareZeroAction(*As, X, Q(-1)), "sq0");
    CHECK(A.tableAct.count(2) == 1);

    CHECK_THROWS_WITH_AS(tableAlgebra(As, X, squareZeroAction(*As, X, Q(1)), "bad"),
                         doctest::Contains("descend"), Error);
}

TEST_CASE("restriction along the thickening keeps a valid action") {
    auto As = std::make_shared<Operad>(presetAs(ringQ(), 3));
    Thickened th = thickenedOperad(As);
    checkOperadMap(th.aug);

    ChainComplex X = concentrated(ringQ(), 1, {"x"});
    Algebra triv = trivialAlgebra(As, X, "pt");
    Algebra back = restrictAlgebra(th.aug, triv);
    CHECK(back.kind == AlgKind::Table);
    CHECK(back.op.get() == th.op.get());
    CHECK(back.tableAct.count(1) == 1);
    CHECK(back.tableAct.count(2) == 0);

    Algebra free = freeAlgebra(As, X, "fx");
    CHECK_THROWS_WITH_AS(restrictAlgebra(th.aug, free), doctest::Contains("free carriers"),
                         Error);
}

TEST_CASE("algebra maps respect or fail the action") {
    auto As = std::make_shared<Operad>(presetAs(ringQ(), 3));
    ChainComplex X;
    X.ring = ringQ();
    X.bas[1] = {"x"};
    X.bas[2] = {"xx"};
    Algebra A = tableAlgebra(As, X, squareZeroAction(*As, X, Q(-1)), "sq0");

    // x -> 2x, xx -> 4xx is multiplicative
    {
        AlgebraMap m;
        m.from = A;
        m.to = A;
        m.kind = AMapKind::Carrier;
        Mat f1(1, 1), f2(1, 1);
        f1.set(0, 0, Q(2));
        f2.set(0, 0, Q(4));
        m.f = DegMap{{1, f1}, {2, f2}};
        checkAlgebraMap(m);
    }
    // x -> 2x, xx -> xx is not
    {
        AlgebraMap m;
        m.from = A;
        m.to = A;
        m.kind = AMapKind::Carrier;
        m.f = degIdentity(X);
        m.f.at(1).set(0, 0, Q(2));
        CHECK_THROWS_WITH_AS(checkAlgebraMap(m), doctest::Contains("respect the action"),
                             Error);
    }
    // seed maps only need to be chain maps of seeds
    {
        ChainComplex V = concentrated(ringQ(), 1, {"v"});
        AlgebraMap m;
        m.from = freeAlgebra(As, V, "fv");
        m.to = freeAlgebra(As, V, "fv");
        m.kind = AMapKind::Seed;
        m.f = degIdentity(V);
        checkAlgebraMap(m);
    }
}

TEST_CASE("axiom reports and truncation projections") {
    auto As = std::make_shared<Operad>(presetAs(ringQ(), 3));
    CHECK(As->sigmaFree);
    CHECK_FALSE(presetCom(ringQ(), 3).sigmaFree);

    CheckReport ok = operadAxiomReport(*As);
    CHECK(ok.pass);
    CHECK(ok.code.empty());

    Operad bad = *As;
    bad.gam[{2, 1, 1}] = degSub(DegMap{}, bad.gam[{2, 1, 1}], ringQ());
    CheckReport rep = operadAxiomReport(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.code == "operad-axiom");
    CHECK(rep.witness.find("unit law") != std::string::npos);

    auto T2 = std::make_shared<Operad>(truncationOperad(*As, 2));
    CHECK(T2->sigmaFree);
    OperadMap pr = truncationMap(As, T2);
    CHECK(degIsZero(pr.psi[3]));
    CHECK_FALSE(degIsZero(pr.psi[2]));

    // a second truncation of the same operad is still downstream of the first
    auto T1 = std::make_shared<Operad>(truncationOperad(*As, 1));
    OperadMap pr21 = truncationMap(T2, T1);
    CHECK(degIsZero(pr21.psi[2]));

    // mismatched bases are rejected
    auto ComT = std::make_shared<Operad>(truncationOperad(presetCom(ringQ(), 3), 2));
    CHECK_THROWS_WITH_AS(truncationMap(As, ComT),
                         doctest::Contains("not a truncation level"), Error);
}
