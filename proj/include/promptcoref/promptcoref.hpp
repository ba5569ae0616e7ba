#ifndef PROMPTCOREF_PROMPTCOREF_HPP
#define PROMPTCOREF_PROMPTCOREF_HPP

#include "promptcoref/corpus.hpp"
#include "promptcoref/extraction.hpp"
#include "promptcoref/llm.hpp"
#include "promptcoref/mention_detect.hpp"
#include "promptcoref/metrics.hpp"
#include "promptcoref/pipeline.hpp"
#include "promptcoref/prompting.hpp"
#include "promptcoref/pronouns.hpp"
#include "promptcoref/sampling.hpp"
#include "promptcoref/text.hpp"

#endif  // PROMPTCOREF_PROMPTCOREF_HPP
