#include "seqgrad/expr.hpp"

#include <unordered_map>

namespace seqgrad {

std::vector<TapeNode> compile_tape(const Expr& root, int arity) {
  if (root.empty()) throw std::invalid_argument("empty expression");
  std::vector<TapeNode> tape;
  std::unordered_map<const ExprNode*, int> slot;

  auto emit = [&](const ExprNode* n, auto&& self) -> int {
    auto it = slot.find(n);
    if (it != slot.end()) return it->second;
    TapeNode out;
    out.op = n->op;
    out.value = n->value;
    out.k = n->k;
    switch (n->op) {
      case Op::Const:
        break;
      case Op::Var:
        if (n->k < 0 || n->k >= arity)
          throw std::invalid_argument("variable index " + std::to_string(n->k + 1) +
                                      " outside 1.." + std::to_string(arity));
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
        out.a = self(n->a.get(), self);
        out.b = self(n->b.get(), self);
        break;
      default:
        out.a = self(n->a.get(), self);
        break;
    }
    const int id = static_cast<int>(tape.size());
    tape.push_back(out);
    slot.emplace(n, id);
    return id;
  };
  emit(root.node().get(), emit);
  return tape;
}

}  // namespace seqgrad
