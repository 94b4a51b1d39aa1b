"""Desk-scale statistical machine translation pipeline toolkit.

Every statistical component is built in: tokenizer/truecaser, BPE, n-gram
language model, IBM 1/2 word alignment, a toy lexicon+LM beam translator,
multi-feature data selection, back/cycle translation, big/small corpus
construction, k-best MIRA reranking, confusion-network system combination,
number repair post-processing, and BLEU.
"""

__version__ = "0.1.0"
