#include "spe/error.hpp"

namespace spe {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::MissingDemand: return "MissingDemand";
    case Errc::NoClientComponent: return "NoClientComponent";
    case Errc::FrozenElement: return "FrozenElement";
    case Errc::BadProbabilities: return "BadProbabilities";
    case Errc::UnknownElement: return "UnknownElement";
    case Errc::InvalidEdit: return "InvalidEdit";
    case Errc::BackwardUnsupportedEdit: return "BackwardUnsupportedEdit";
    case Errc::NothingToBatch: return "NothingToBatch";
    case Errc::NoSuchOccurrence: return "NoSuchOccurrence";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::EmptyLedger: return "EmptyLedger";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace spe
