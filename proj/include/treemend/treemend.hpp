#pragma once

// Wrapper repair by tree matching: parse HTML into labeled ordered trees,
// score subtree similarity (simple and clustered tree matching), persist
// structural signatures, and re-induce XPaths when a page changes.

#include "treemend/adapt.hpp"
#include "treemend/corpus.hpp"
#include "treemend/dom.hpp"
#include "treemend/eval.hpp"
#include "treemend/html.hpp"
#include "treemend/match.hpp"
#include "treemend/rational.hpp"
#include "treemend/signature.hpp"
#include "treemend/xpath.hpp"
