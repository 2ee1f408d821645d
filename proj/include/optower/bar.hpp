/* The two sided simplicial bar construction over an operad and its
 * realization as a chain complex, together with the relative circle products
 * derived from it: indecomposables complexes, completion tower stages and
 * layers, degenerate subobjects, enveloping sequences, cube filtrations, and
 * pushouts along free maps.
 *
 * Every carrier is handled through a degree window. Simplicial level p of a
 * bar construction with realized degrees up to `top` is materialized through
 * internal degree top + 1 - p, which is exactly what the realization needs:
 * levels contribute to total degree p + (internal degree), so the realized
 * complex is complete through degree top + 1 and its homology is trustworthy
 * through `top`. Degeneracies map into the smaller window of the next level
 * and silently drop the top degree; identity checks are therefore bounded by
 * the window of the highest level they visit. */
#pragma once

#include "operad.hpp"

namespace ot {

/* A window [lo, hi] of an operad's levels, used as a right module over a
 * truncation of the same operad. Tau views give the tower stages, level
 * views the layers, above views their complements. `acting` must be a
 * literal truncation of `host`: identical level bases below its cutoff. */
struct ModuleView {
    std::shared_ptr<const Operad> host, acting;
    int lo = 1, hi = 0;
    std::string name;

    bool keeps(int t) const { return t >= lo && t <= hi; }
    const Ring& ring() const { return host->ring(); }
};
ModuleView fullView(std::shared_ptr<const Operad> O);
ModuleView tauView(std::shared_ptr<const Operad> O, int k);
ModuleView levelView(std::shared_ptr<const Operad> O, int k);
ModuleView aboveView(std::shared_ptr<const Operad> O, int k);
ModuleView viewOver(std::shared_ptr<const Operad> host,
                    std::shared_ptr<const Operad> acting, int lo, int hi);

/* Gate for constructions whose output is only homotopy meaningful on this
 * input: the rationals always pass, every other ring needs levelwise free
 * symmetric actions. */
void checkDerivedPolicy(const Operad& O);

/* N applied to a carrier: the sum over arities t kept by the view of
 * N[t] (x)_{Sigma_t} C^(x)t, truncated above degree `top`. The carrier must
 * vanish in degrees <= 0, so part t starts in degree t and only finitely
 * many arities survive the window. Bases at a shared degree do not depend on
 * the window, which lets maps between different windows share indices. */
struct SchurPart {
    int t = 0;
    TensorComplex pow;             // C^(x)t over the window
    std::vector<DegMap> leftGens;  // adjacent transpositions on pow, Koszul signed
    Coinv cv;                      // N[t] (x)_{Sigma_t} pow
};
struct SchurData {
    Ring ring;
    ModuleView view;
    int top = 0;
    ChainComplex carrier;
    std::vector<SchurPart> parts;          // ascending t, zero parts omitted
    ChainComplex total;                    // parts concatenated per degree
    std::map<int, std::vector<long>> off;  // degree -> offset of each part

    int partIndex(int t) const;  // position in parts, -1 when absent
};
SchurData schur(const ModuleView& N, const ChainComplex& C, int top);

/* Functorial image N(f) of a degree zero chain map f : C -> D between schur
 * data over the same view. Source degrees above the target window drop. */
DegMap schurMap(const SchurData& SC, const SchurData& SD, const DegMap& f);

/* x |-> class of (unit (x) x) in the arity one part. */
DegMap unitInsert(const ChainComplex& C, const SchurData& SOC);

/* The collapse N(g) followed by the action of gamma: expand every carrier
 * factor through g and the inner schur data, compose the operad pieces, and
 * reassemble in dst. src and dst share the view; inner is a full view over
 * the acting operad whose total is the target of g. Parts outside the dst
 * view drop, as do source degrees above the dst window. */
DegMap schurCollapse(const SchurData& src, const DegMap& g, const SchurData& inner,
                     const SchurData& dst);

/* The action map S(carrier) -> carrier of an algebra, evaluated on existing
 * schur data over the algebra's operad and carrier. Free algebras need their
 * carrier data: the schur data over the seed whose total is the carrier. */
DegMap algebraAction(const SchurData& S, const Algebra& A, const SchurData* carrierData);

/* Carrier of an algebra at a window: free algebras get the realized Schur
 * carrier over their seed, the others their seed unchanged. */
struct CarrierData {
    ChainComplex C;
    std::shared_ptr<SchurData> data;  // free algebras only
};
CarrierData materializeCarrier(const Algebra& A, int top);

/* N o_O X: the reflexive coequalizer of N(O(X)) => N(X). */
ChainComplex relativeCircle(const ModuleView& N, const Algebra& X, int top);

/* Everything the bar construction over (O, X) shares across module views:
 * the iterated free carriers W_q = O(W_{q-1}), the action, collapse, and
 * unit insertion chains, and the full view levels with their faces and
 * degeneracies. Views select parts of the shared levels afterwards. */
struct BarContext {
    std::shared_ptr<const Operad> op;
    Algebra alg;
    int P = 0, top = 0;
    ChainComplex carrier;                    // W_0
    std::shared_ptr<SchurData> carrierData;  // free algebras only
    std::vector<SchurData> W;                // W[q], q = 1..P ([0] unused)
    std::vector<SchurData> L;                // level p = full view of W_p, p = 0..P
    std::vector<DegMap> act;                 // act[q] : W[q].total -> W_{q-1}
    std::vector<std::vector<DegMap>> col;    // col[q][i], inner collapses, 1 <= i <= q-1
    std::vector<std::vector<DegMap>> ins;    // ins[q][j] : W_q -> W[q+1].total, 0 <= j <= q
    std::vector<DegMap> dlt;                 // free algebras: S(eta) : W_q -> W[q+1].total
    std::vector<std::vector<DegMap>> dFace;  // dFace[p][i] : L[p] -> L[p-1], 0 <= i <= p
    std::vector<std::vector<DegMap>> sDeg;   // sDeg[p][j] : L[p] -> L[p+1], 0 <= j <= p
    std::vector<DegMap> sXtra;               // free algebras: extra degeneracy per level

    const ChainComplex& wTotal(int q) const { return q == 0 ? carrier : W[q].total; }
    int winAt(int p) const { return top + 1 - p; }
};
std::shared_ptr<const BarContext> barContext(const Algebra& X, int P, int top);

/* One module view of a shared context: levels with faces and degeneracies,
 * plus the part selection maps into the full view levels. */
struct BarView {
    std::shared_ptr<const BarContext> ctx;
    ModuleView N;
    std::vector<ChainComplex> lev;        // p = 0..P
    std::vector<DegMap> incl, proj;       // lev[p] <-> L[p].total
    std::vector<std::vector<DegMap>> d;   // d[p][i], p >= 1
    std::vector<std::vector<DegMap>> s;   // s[p][j], p <= P-1
    std::vector<DegMap> sx;               // free algebras only
    std::vector<std::vector<int>> arity;                // per level: arity of each part slot
    std::vector<std::map<int, std::vector<long>>> off;  // per level: degree -> part offsets
};
BarView barOver(std::shared_ptr<const BarContext> ctx, const ModuleView& N);
BarView barConstruction(const ModuleView& N, const Algebra& X, int P, int top);

/* d_i d_j, d_i s_j, and s_i s_j relations, bounded by the window of the
 * highest level each composite visits. Throws internal on a violation. */
void checkSimplicialIdentities(const BarView& B);
/* For free algebras: d_i sx = sx d_i below the top face and d_{p+1} sx = id,
 * the contraction that makes the realization split. */
void checkExtraDegeneracy(const BarView& B);

/* Realization: normalize each level by the span of the degeneracies,
 * totalize with the alternating face sum as horizontal differential, and
 * cross check the homology against the intersection normalization
 * (kernel of d_i, i >= 1, with d_0 as differential) through the sound range.
 * Homology of C is trustworthy for degrees <= soundness. */
struct Realized {
    ChainComplex C;
    int P = 0, top = 0, soundness = 0;
    std::string provenance;
    std::vector<QuotientData> norm;        // per level normalization
    std::map<int, std::vector<long>> off;  // total degree -> offset per level
};
Realized realize(const BarView& B);

/* Induced map on realizations of a levelwise map f[p] : A.lev[p] ->
 * B.lev[p] that commutes with faces and degeneracies. */
DegMap realizedMap(const Realized& RA, const Realized& RB, const std::vector<DegMap>& f);

/* Levelwise transfer between views of one context: the inclusion when A
 * keeps fewer parts than B, the projection when it keeps more. */
std::vector<DegMap> viewTransfer(const BarView& A, const BarView& B);

/* eps : |Bar(O, O, X)| -> X, the algebra action on level zero. Defined for
 * full views; checked as a chain map. */
DegMap augmentation(const BarView& B, const Realized& R);

Realized derivedCircle(const ModuleView& N, const Algebra& X, int P, int top);
Realized tqComplex(std::shared_ptr<const BarContext> ctx);
Realized towerStage(std::shared_ptr<const BarContext> ctx, int k);

/* Layer k >= 2 of the completion tower, computed up to three ways: the
 * realized bar over the single level view; for unitary level one operads
 * also the relative circle of that view over tau_1 against the
 * indecomposables complex, and the single schur part O[k] applied to it.
 * The homologies must agree through the shared sound range. */
struct LayerReport {
    Realized viaBar;
    ChainComplex viaCircle, viaSchur;  // empty unless O is unitary at level one
    int comparedUpTo = -1;
};
LayerReport layer(std::shared_ptr<const BarContext> ctx, int k);

/* Realized short exact sequence of views at level k: O[k] parts into tau_k
 * onto tau_{k-1}, or with `coaugmented` the above k parts into the full view
 * onto tau_k. Exactness is verified per degree. */
struct LayerSES {
    Realized sub, mid, quot;
    DegMap incl, proj;
};
LayerSES layerShortExact(std::shared_ptr<const BarContext> ctx, int k, bool coaugmented);

/* The degenerate subobject of level n, two ways: the span of the images of
 * the degeneracies, and the colimit of the punctured cube of lower levels
 * glued along degeneracy insertions. Their images in the level must agree
 * per degree through the window of level n. */
struct DegenerateSub {
    SubComplex span;      // inside B.lev[n]
    ChainComplex colim;   // punctured cube model
    DegMap toLevel;       // colim -> B.lev[n]
};
DegenerateSub degenerateSubobject(const BarView& B, int n);

/* Level q of the enveloping sequence of an algebra: the coequalizer of
 * coprod_p O[p+q] (x)_{Sigma_p} O(A)^(x)p => coprod_p O[p+q] (x)_{Sigma_p}
 * A^(x)p, with the residual Sigma_q action on the last q inputs. */
struct EnvelopingLevel {
    ChainComplex C;
    std::vector<DegMap> gens;  // adjacent transpositions of Sigma_q
};
EnvelopingLevel envelopingSeq(std::shared_ptr<const Operad> O, const Algebra& A,
                              int q, int top);

/* Stage q of the cube filtration of Y^(x)t along an injection i : X -> Y:
 * the span of the images of the mixed tensors with at most q factors left at
 * Y, embedded in Y^(x)t with its Sigma_t action, cross checked against the
 * abstract colimit over the subcube. */
struct QCubeStage {
    SubComplex emb;
    std::vector<DegMap> gens;  // on emb.sub, adjacent transpositions of Sigma_t
    ChainComplex colim;
};
QCubeStage qCube(const ChainComplex& X, const ChainComplex& Y, const DegMap& inc,
                 int t, int q, int top);

/* Tabulate a free algebra's action through the window so it can be fed to
 * constructions that need explicit tables. The table materializes full
 * ambient tensors, so keep the carriers small. */
Algebra tableFromFree(const Algebra& A, int top);

/* Pushout of A <- O(X) -> O(Y) along fbar : X -> carrier(A) (the adjoint
 * form of the attaching map) and an injective i : X -> Y, computed directly
 * as a reflexive coequalizer and again through the enveloping filtration.
 * The two carriers must agree per degree; the result is a table algebra on
 * the direct carrier. */
struct PushoutResult {
    Algebra out;
    std::map<int, int> directDims, filteredDims;
};
PushoutResult pushoutAlongFree(const Algebra& A, const DegMap& fbar, const ChainComplex& X,
                               const ChainComplex& Y, const DegMap& inc, int top);

}  // namespace ot
