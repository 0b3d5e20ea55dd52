#ifndef DEEPCHROMA_DEEPCHROMA_HPP
#define DEEPCHROMA_DEEPCHROMA_HPP

#include "deepchroma/annotations.hpp"
#include "deepchroma/binio.hpp"
#include "deepchroma/classifier.hpp"
#include "deepchroma/corpus.hpp"
#include "deepchroma/dsp.hpp"
#include "deepchroma/error.hpp"
#include "deepchroma/eval.hpp"
#include "deepchroma/features.hpp"
#include "deepchroma/nn.hpp"
#include "deepchroma/render.hpp"
#include "deepchroma/report.hpp"
#include "deepchroma/saliency.hpp"
#include "deepchroma/synth.hpp"
#include "deepchroma/wav.hpp"

#endif  // DEEPCHROMA_DEEPCHROMA_HPP
