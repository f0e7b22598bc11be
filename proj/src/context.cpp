#include "rnmt/context.hpp"

namespace rnmt {

Mechanism parse_mechanism(const std::string& name) {
    if (name == "attention") return Mechanism::Attention;
    if (name == "contexter") return Mechanism::Contexter;
    throw InvalidArgument("unknown mechanism: " + name);
}

std::string mechanism_name(Mechanism m) {
    return m == Mechanism::Attention ? "attention" : "contexter";
}

ContextPooling parse_pooling(const std::string& name) {
    if (name == "mean-pooling") return ContextPooling::MeanPooling;
    if (name == "last-state") return ContextPooling::LastState;
    throw InvalidArgument("unknown output mode: " + name);
}

std::string pooling_name(ContextPooling p) {
    return p == ContextPooling::MeanPooling ? "mean-pooling" : "last-state";
}

}  // namespace rnmt
