#include "energytwin/error.hpp"

namespace energytwin {

std::string_view errc_name(Errc code) {
	switch (code) {
	case Errc::InvalidConfig: return "InvalidConfig";
	case Errc::InvalidHyperparameter: return "InvalidHyperparameter";
	case Errc::InvalidQuantile: return "InvalidQuantile";
	case Errc::NonPositivePeriod: return "NonPositivePeriod";
	case Errc::InvalidFraction: return "InvalidFraction";
	case Errc::UnknownModel: return "UnknownModel";
	case Errc::DuplicateId: return "DuplicateId";
	case Errc::UnitOnNonPoint: return "UnitOnNonPoint";
	case Errc::UnknownEntity: return "UnknownEntity";
	case Errc::PredicateKindMismatch: return "PredicateKindMismatch";
	case Errc::DuplicateTriple: return "DuplicateTriple";
	case Errc::NotAPoint: return "NotAPoint";
	case Errc::AlreadyBound: return "AlreadyBound";
	case Errc::Unbound: return "Unbound";
	case Errc::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
	case Errc::ParseError: return "ParseError";
	case Errc::IntegrityError: return "IntegrityError";
	case Errc::MalformedTimestamp: return "MalformedTimestamp";
	case Errc::MalformedValue: return "MalformedValue";
	case Errc::DuplicateTimestamp: return "DuplicateTimestamp";
	case Errc::NonHourlyStep: return "NonHourlyStep";
	case Errc::EdgeMissing: return "EdgeMissing";
	case Errc::EmptyIntersection: return "EmptyIntersection";
	case Errc::BoundaryOutOfRange: return "BoundaryOutOfRange";
	case Errc::EmptyColumn: return "EmptyColumn";
	case Errc::NotFitted: return "NotFitted";
	case Errc::TooShort: return "TooShort";
	case Errc::InsufficientHistory: return "InsufficientHistory";
	case Errc::ShapeMismatch: return "ShapeMismatch";
	case Errc::LengthMismatch: return "LengthMismatch";
	case Errc::ZeroMeanTarget: return "ZeroMeanTarget";
	case Errc::NonPositiveTargetSum: return "NonPositiveTargetSum";
	case Errc::SchemaMismatch: return "SchemaMismatch";
	case Errc::IoError: return "IoError";
	case Errc::SingularSystem: return "SingularSystem";
	case Errc::DivergedLoss: return "DivergedLoss";
	}
	return "Unknown";
}

ErrorCategory category_of(Errc code) {
	switch (code) {
	case Errc::InvalidConfig:
	case Errc::InvalidHyperparameter:
	case Errc::InvalidQuantile:
	case Errc::NonPositivePeriod:
	case Errc::InvalidFraction:
	case Errc::UnknownModel:
		return ErrorCategory::Config;
	case Errc::SingularSystem:
	case Errc::DivergedLoss:
		return ErrorCategory::Numerical;
	default:
		return ErrorCategory::Data;
	}
}

Error::Error(Errc code, const std::string &message, std::string subject)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), subject_(std::move(subject)) {
}

} // namespace energytwin
