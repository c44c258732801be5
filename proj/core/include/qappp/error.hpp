#pragma once

#include <stdexcept>
#include <string>

namespace qappp {

// Base class for all pipeline errors. Subclasses carry enough context in
// the message to locate the offending record, line, or column.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define QAPPP_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(what) {}    \
    }

// dataset
QAPPP_DEFINE_ERROR(UnreadableFile);
QAPPP_DEFINE_ERROR(MissingField);
QAPPP_DEFINE_ERROR(EmptyGoldAnswers);
QAPPP_DEFINE_ERROR(UnknownCategory);
QAPPP_DEFINE_ERROR(MalformedTemplate);
QAPPP_DEFINE_ERROR(OrphanParaphrase);
QAPPP_DEFINE_ERROR(NoParaphrases);

// answering
QAPPP_DEFINE_ERROR(EndpointUnavailable);
QAPPP_DEFINE_ERROR(MalformedResponse);

// semantics
QAPPP_DEFINE_ERROR(ProviderUnavailable);
QAPPP_DEFINE_ERROR(DimensionMismatch);
QAPPP_DEFINE_ERROR(TooFewTexts);
QAPPP_DEFINE_ERROR(IncompleteAnswerSet);

// scoring
QAPPP_DEFINE_ERROR(ArticleNotFound);

// formula / design matrix
QAPPP_DEFINE_ERROR(ParseError);
QAPPP_DEFINE_ERROR(UnknownTransform);
QAPPP_DEFINE_ERROR(ZeroVariance);
QAPPP_DEFINE_ERROR(MissingVariable);
QAPPP_DEFINE_ERROR(SingleLevelCategorical);

// glm
QAPPP_DEFINE_ERROR(SeparationDetected);
QAPPP_DEFINE_ERROR(SingularHessian);
QAPPP_DEFINE_ERROR(NotConverged);
QAPPP_DEFINE_ERROR(NullNotFitted);
QAPPP_DEFINE_ERROR(SingularBlock);
QAPPP_DEFINE_ERROR(ColumnMismatch);

// evaluation
QAPPP_DEFINE_ERROR(DegenerateClass);
QAPPP_DEFINE_ERROR(NonNumericVariable);
QAPPP_DEFINE_ERROR(DegenerateSample);

// pipeline
QAPPP_DEFINE_ERROR(MissingPrerequisite);
QAPPP_DEFINE_ERROR(StaleManifest);

#undef QAPPP_DEFINE_ERROR

}  // namespace qappp
