#pragma once

#include <memory>
#include <span>
#include <vector>

#include "algcalc/nlconn.hpp"

namespace algcalc {

enum class Family { H, V };
enum class Variance { Contra, Co };

struct Slot {
  Family family = Family::H;
  Variance variance = Variance::Contra;
  bool operator==(const Slot&) const = default;
};

inline constexpr std::size_t kMaxSlots = 8;

class IndexSignature {
 public:
  IndexSignature() = default;
  explicit IndexSignature(std::vector<Slot> slots);

  std::size_t rank() const { return slots_.size(); }
  const Slot& operator[](std::size_t i) const { return slots_[i]; }
  const std::vector<Slot>& slots() const { return slots_; }
  int extent(std::size_t i, int p, int r) const { return slots_[i].family == Family::H ? p : r; }
  std::size_t component_count(int p, int r) const;
  IndexSignature appended(Slot s) const;
  bool operator==(const IndexSignature&) const = default;

 private:
  std::vector<Slot> slots_;
};

// Components in the adapted basis, row-major over the slots.
class DTensorField {
 public:
  DTensorField(int p, int r, IndexSignature sig, FieldArray components);
  static DTensorField from_fields(int p, int r, IndexSignature sig, std::vector<ScalarField> f);

  int p() const { return p_; }
  int r() const { return r_; }
  const IndexSignature& signature() const { return sig_; }
  const FieldArray& components() const { return comps_; }
  Dims field_dims() const { return comps_.dims(); }
  std::size_t offset(std::span<const int> index) const;
  std::vector<Jet> eval(const Point& pt, int order) const { return comps_.eval(pt, order); }

 private:
  int p_, r_;
  IndexSignature sig_;
  FieldArray comps_;
};

// Block layout of the flat coefficient array.
struct DConnectionLayout {
  int p = 0, r = 0;
  std::size_t hh(int a, int b, int g) const { return (static_cast<std::size_t>(a) * p + b) * p + g; }
  std::size_t hv(int a, int b, int g) const { return hv0() + (static_cast<std::size_t>(a) * r + b) * p + g; }
  std::size_t vh(int a, int b, int c) const { return vh0() + (static_cast<std::size_t>(a) * p + b) * r + c; }
  std::size_t vv(int a, int b, int c) const { return vv0() + (static_cast<std::size_t>(a) * r + b) * r + c; }
  std::size_t hv0() const { return static_cast<std::size_t>(p) * p * p; }
  std::size_t vh0() const { return hv0() + static_cast<std::size_t>(r) * r * p; }
  std::size_t vv0() const { return vh0() + static_cast<std::size_t>(p) * p * r; }
  std::size_t size() const { return vv0() + static_cast<std::size_t>(r) * r * r; }
};

// H^alpha_{beta gamma}, H^a_{b gamma}, V^alpha_{beta c}, V^a_{bc} concatenated in one array.
class DConnection {
 public:
  DConnection(ConnectionPtr C, FieldArray blocks);
  static DConnection from_blocks(ConnectionPtr C, std::vector<ScalarField> hh,
                                 std::vector<ScalarField> hv, std::vector<ScalarField> vh,
                                 std::vector<ScalarField> vv);
  static DConnection zero(ConnectionPtr C);

  const NonlinearConnection& nlconn() const { return *C_; }
  const ConnectionPtr& nlconn_ptr() const { return C_; }
  const GeneralizedAlgebroid& algebroid() const { return C_->algebroid(); }
  int p() const { return C_->p(); }
  int r() const { return C_->r(); }
  Dims field_dims() const { return C_->field_dims(); }
  DConnectionLayout layout() const { return {p(), r()}; }
  const FieldArray& blocks() const { return blocks_; }
  std::vector<Jet> eval(const Point& pt, int order) const { return blocks_.eval(pt, order); }

 private:
  ConnectionPtr C_;
  FieldArray blocks_;
};

// p = r: H^a_{bc} and V^a_{bc}, each r^3, stored H then V.
class NormalDConnection {
 public:
  NormalDConnection(ConnectionPtr C, FieldArray blocks);
  const NonlinearConnection& nlconn() const { return *C_; }
  const ConnectionPtr& nlconn_ptr() const { return C_; }
  int r() const { return C_->r(); }
  std::size_t h(int a, int b, int c) const { return (static_cast<std::size_t>(a) * r() + b) * r() + c; }
  std::size_t v(int a, int b, int c) const {
    return static_cast<std::size_t>(r()) * r() * r() + h(a, b, c);
  }
  const FieldArray& blocks() const { return blocks_; }
  std::vector<Jet> eval(const Point& pt, int order) const { return blocks_.eval(pt, order); }
  DConnection to_dconnection() const;

 private:
  ConnectionPtr C_;
  FieldArray blocks_;
};

DConnection berwald(ConnectionPtr C);

// T_{|gamma} for all gamma (appended co-H slot) or one gamma (same signature).
DTensorField h_cov_deriv(const DConnection& D, const DTensorField& T);
DTensorField h_cov_deriv(const DConnection& D, const DTensorField& T, int gamma);
// T|_c for all c (appended co-V slot) or one c.
DTensorField v_cov_deriv(const DConnection& D, const DTensorField& T);
DTensorField v_cov_deriv(const DConnection& D, const DTensorField& T, int c);
// Z^gamma T_{|gamma} + Y^c T|_c with X given in the adapted basis.
DTensorField cov_deriv_along(const DConnection& D, const Section& X, const DTensorField& T);

// Pointwise kernels used by the verifiers: D blocks at order k, T at order k + 1.
std::vector<Jet> h_cov_kernel(const DConnection& D, const std::vector<Jet>& blocks,
                              const AdaptedDerivations& ad, const IndexSignature& sig,
                              const std::vector<Jet>& T);
std::vector<Jet> v_cov_kernel(const DConnection& D, const std::vector<Jet>& blocks,
                              const AdaptedDerivations& ad, const IndexSignature& sig,
                              const std::vector<Jet>& T);

DConnection transform_dconnection(const DConnection& D, const FrameChange& F);

DTensorField tensor_product(const DTensorField& S, const DTensorField& T);
// Output slot i is input slot perm[i].
DTensorField permute_slots(const DTensorField& T, const std::vector<int>& perm);
// Contracts a contra and a co slot of the same family.
DTensorField contract(const DTensorField& T, int slot_a, int slot_b);

}  // namespace algcalc
