#!/usr/bin/env python3
"""Walk through the six preprocessing steps on raw Indonesian comments.

Each step is shown separately, then composed through run_pipeline.
"""

from sentimen.preprocess import (PreprocessConfig, case_fold, clean,
                                 normalize_slang, remove_stopwords,
                                 run_pipeline, tokenize)
from sentimen.stemmer import IndonesianStemmer

cfg = PreprocessConfig.default()

comment = ("Program MBG sangat BAGUS!! makanannya bergizi, "
           "anak2 gak kelaparan lagi http://contoh.id @menteri #mbg 100%")

print("raw comment:")
print(" ", comment)

# step 1: case folding
step1 = case_fold(comment)
print("\n1. case folded:")
print(" ", step1)

# step 2: cleaning (URLs, mentions, hashtags, digits, punctuation)
step2 = clean(step1)
print("\n2. cleaned:")
print(" ", step2)

# step 3: slang normalization ("gak" is the bundled colloquial negation)
step3 = normalize_slang(step2, cfg.slang)
print("\n3. slang normalized:")
print(" ", step3)

# step 4: tokenization
step4 = tokenize(step3)
print("\n4. tokens:")
print(" ", step4)

# step 5: stopword removal
step5 = remove_stopwords(step4, cfg.stopwords)
print("\n5. without stopwords:")
print(" ", step5)

# step 6: stemming (dictionary-gated affix stripping)
stemmer = IndonesianStemmer(cfg.roots)
step6 = [stemmer.stem(t) for t in step5]
print("\n6. stemmed:")
print(" ", step6)

# the composed pipeline gives the same result in one call
assert run_pipeline(comment, cfg) == step6
print("\nrun_pipeline(comment) ==", run_pipeline(comment, cfg))

# a closer look at the stemmer on classic derivations
print("\nstemmer on derived forms:")
for word in ("makanan", "memberikan", "pembelajaran", "kebijakan",
             "mempermainkan", "keterlambatan", "sebaiknya"):
    print(f"  {word:18s} -> {stemmer.stem(word)}")
