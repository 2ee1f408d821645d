/* Operads in chain complexes with explicit structure constants, preset
 * families (associative, commutative, free on generators, truncations,
 * thickenings), operad maps, and algebras over an operad. */
#pragma once

#include "symseq.hpp"

#include <memory>
#include <string>

namespace ot {

/* Composition data is stored per ordered arity tuple. The key {t, s_1..s_t}
 * holds gamma : O[t] (x) O[s_1] (x) ... (x) O[s_t] -> O[s_1+...+s_t] together
 * with its source tensor index. Keys whose total exceeds Rmax are not stored;
 * an absent key acts as the zero map. */
struct Operad {
    SymSeq seq;
    int unitIdx = 0;        // basis position of the unit in O[1], degree 0
    bool unitary1 = false;  // O[1] is one dimensional, spanned by the unit
    bool sigmaFree = false; // levels are sums of regular representations
    std::string name;
    std::map<std::vector<int>, DegMap> gam;
    std::map<std::vector<int>, TensorComplex> gsrc;

    int Rmax() const { return seq.Rmax; }
    const Ring& ring() const { return seq.ring; }
    const ChainComplex& level(int r) const { return seq.lev[r]; }
    const DegMap& gammaAt(const std::vector<int>& key) const;       // empty if absent
    const TensorComplex& sourceAt(const std::vector<int>& key) const;
};

/* All keys {t, s_1..s_t} with t >= 1, s_i >= 1, total <= Rmax. */
std::vector<std::vector<int>> gammaKeys(int Rmax);

/* Build the source tensor indexes for every composition key. The
 * constructors below call this; hand assembled operads must call it before
 * use. */
void fillGammaSources(Operad& O);

/* Full mechanical check: level actions, unit laws, both equivariance laws,
 * associativity over every composable shape, and compatibility of every
 * gamma with the differentials. Throws on the first violation. */
void checkOperadAxioms(const Operad& O);

/* Non-throwing variant for report surfaces. */
struct CheckReport {
    bool pass = false;
    std::string code;     // error code on failure
    std::string witness;  // first violation
};
CheckReport operadAxiomReport(const Operad& O);

Operad presetAs(const Ring& R, int Rmax);   // linear orders, word concatenation
Operad presetCom(const Ring& R, int Rmax);  // one point in every arity
Operad truncationOperad(const Operad& O, int k);
/* Free operad on a generator sequence with gens[0] = gens[1] = 0; basis is
 * labeled trees with canonically ordered children. */
Operad freeOperad(const SymSeq& gens);

struct OperadMap {
    std::shared_ptr<const Operad> from, to;
    std::vector<DegMap> psi;  // per level
    std::string name;
};
void checkOperadMap(const OperadMap& m);

/* The projection onto a truncation: identity on the surviving levels, zero
 * above. `to` must have been produced by truncationOperad from `from` (or
 * from a deeper truncation of it). */
OperadMap truncationMap(std::shared_ptr<const Operad> from, std::shared_ptr<const Operad> to);

/* O (x) E for the three cell acyclic algebra E = <1, y, x : dx = y>; the
 * augmentation collapses E onto its unit and is a levelwise quasi
 * isomorphism. */
struct Thickened {
    std::shared_ptr<Operad> op;
    OperadMap aug;
};
Thickened thickenedOperad(std::shared_ptr<const Operad> O);

/* Algebras. Free: the carrier is the Schur functor of the seed, realized per
 * degree window downstream. Trivial: the seed with zero action above t = 1
 * (needs a unitary level 1). Table: the seed with explicit action maps on the
 * ambient tensors O[t] (x) X^(x)t, t -> map, absent t meaning zero action;
 * the maps must descend to coinvariants. Seeds must vanish in degrees <= 0. */
enum class AlgKind { Free, Trivial, Table };

struct Algebra {
    std::shared_ptr<const Operad> op;
    AlgKind kind = AlgKind::Trivial;
    ChainComplex seed;
    std::map<int, DegMap> tableAct;
    std::string name;
};

Algebra freeAlgebra(std::shared_ptr<const Operad> O, const ChainComplex& V,
                    const std::string& name);
Algebra trivialAlgebra(std::shared_ptr<const Operad> O, const ChainComplex& X,
                       const std::string& name);
Algebra tableAlgebra(std::shared_ptr<const Operad> O, const ChainComplex& X,
                     std::map<int, DegMap> act, const std::string& name);
/* Pull an algebra back along psi : O' -> O. Free carriers are not tabled;
 * only Trivial and Table algebras restrict. */
Algebra restrictAlgebra(const OperadMap& psi, const Algebra& A);

/* Unit law, descent to coinvariants, and action associativity over every
 * composable shape, all on ambient tensors. Free algebras only get their
 * seed validated; their action is composition in O itself. */
void checkAlgebra(const Algebra& A);

/* Maps of algebras. Carrier: f on the carriers of two Trivial or Table
 * algebras over the same operad, compatible with the actions. Seed: f on the
 * seeds of two Free algebras; the carrier map is the induced one. */
enum class AMapKind { Carrier, Seed };

struct AlgebraMap {
    Algebra from, to;
    AMapKind kind = AMapKind::Carrier;
    DegMap f;
    std::string name;
};
void checkAlgebraMap(const AlgebraMap& m);

}  // namespace ot
