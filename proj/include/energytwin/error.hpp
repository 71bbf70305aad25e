#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace energytwin {

enum class Errc {
	// configuration
	InvalidConfig,
	InvalidHyperparameter,
	InvalidQuantile,
	NonPositivePeriod,
	InvalidFraction,
	UnknownModel,
	// twin graph
	DuplicateId,
	UnitOnNonPoint,
	UnknownEntity,
	PredicateKindMismatch,
	DuplicateTriple,
	NotAPoint,
	AlreadyBound,
	Unbound,
	NonMonotonicTimestamp,
	ParseError,
	IntegrityError,
	// time series and features
	MalformedTimestamp,
	MalformedValue,
	DuplicateTimestamp,
	NonHourlyStep,
	EdgeMissing,
	EmptyIntersection,
	BoundaryOutOfRange,
	EmptyColumn,
	NotFitted,
	TooShort,
	// models and metrics
	InsufficientHistory,
	ShapeMismatch,
	LengthMismatch,
	ZeroMeanTarget,
	NonPositiveTargetSum,
	SchemaMismatch,
	IoError,
	// numerical
	SingularSystem,
	DivergedLoss,
};

/// Coarse grouping used for CLI exit codes.
enum class ErrorCategory { Config = 1, Data = 2, Numerical = 3 };

std::string_view errc_name(Errc code);
ErrorCategory category_of(Errc code);

class Error : public std::runtime_error {
public:
	Error(Errc code, const std::string &message, std::string subject = {});

	Errc code() const noexcept {
		return code_;
	}
	/// Offending identifier (entity id, column name, ...), empty when not applicable.
	const std::string &subject() const noexcept {
		return subject_;
	}
	ErrorCategory category() const noexcept {
		return category_of(code_);
	}

private:
	Errc code_;
	std::string subject_;
};

} // namespace energytwin
