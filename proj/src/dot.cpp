#include "valp/dot.hpp"

#include <sstream>

namespace valp {

std::string export_dot(const ModelGraph& graph) {
    std::ostringstream os;
    os << "digraph valp {\n  rankdir=LR;\n";
    for (const auto& i : graph.inputs) {
        os << "  \"" << i.id << "\" [shape=circle, label=\"" << i.id << "\\n" << to_string(i.spec.dtype()) << " "
           << i.spec.width() << "\"];\n";
    }
    for (const auto& n : graph.networks) {
        os << "  \"" << n.id() << "\" [shape=triangle, label=\"" << n.id() << "\\n" << to_string(n.ntype())
           << "\"];\n";
    }
    for (const auto& o : graph.outputs) {
        os << "  \"" << o.id << "\" [shape=square, label=\"" << o.id << "\\n" << to_string(o.spec.dtype()) << " "
           << o.spec.width() << "\"];\n";
    }
    for (const auto& c : graph.connections) {
        os << "  \"" << c.source() << "\" -> \"" << c.target() << "\" [label=\"" << c.width() << "\"";
        if (graph.deleted_at_inference.count(c.id())) os << ", style=dotted";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace valp
