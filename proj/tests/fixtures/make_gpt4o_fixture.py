"""Regenerates gpt4o_table_fixture.json.

Searches for per-category (sample count, failure count) pairs whose rendered
cells match the published GPT-4o row: per-category score and FR over all
samples, FR without refinement, and its change. Among the candidates, the
combination closest to the target total sample counts whose pooled FR and
pooled change render as 02.18 and (-1.48) is kept, then turned into score
histograms (failures at 3 for originals and 2 for refined samples, passes
spread evenly around 8 and 6).

Usage: python3 make_gpt4o_fixture.py > /dev/null  (writes next to this file)
"""
import itertools
import json
import os

cats=["Nationality","Gender","Religion","Race","Animal","Disability","Exploitation","Political"]
score_t=[7.53,7.43,7.52,7.30,7.15,7.44,7.39,7.26]
fr_t=["00.43","02.14","01.24","03.53","03.64","02.54","03.36","00.44"]
orig_fr_t=["00.50","00.50","00.00","00.00","02.82","00.50","01.51","00.00"]
delta_t=["+0.07","-1.64","-1.24","-3.53","-0.82","-2.04","-1.85","-0.44"]
n_o=[200,200,200,200,177,200,199,200]
f_o=[1,1,0,0,5,1,3,0]
t8=[231,234,251,258,220,236,238,227]
def pct(x): return "%05.2f"%(x*100)
def dl(x):
    s="%.2f"%(x*100)
    return s if s.startswith("-") else "+"+s
for i in range(8): assert pct(f_o[i]/n_o[i])==orig_fr_t[i],(i,pct(f_o[i]/n_o[i]))
choices=[]
for i in range(8):
    best=None
    for n in sorted(range(n_o[i]+1,n_o[i]+120),key=lambda n:abs(n-t8[i])):
        for f in range(f_o[i],n):
            fr=f/n
            if pct(fr)==fr_t[i] and dl(f_o[i]/n_o[i]-fr)==delta_t[i]:
                best=(n,f);break
        if best: break
    choices.append(best)
print(choices)
N=sum(c[0] for c in choices);F=sum(c[1] for c in choices)
print(N,F,pct(F/N),dl(sum(f_o)/sum(n_o)-F/N))
# score sums
S=[]
for i,(n,f) in enumerate(choices):
    s=round(score_t[i]*n); assert "%.2f"%(s/n)=="%.2f"%score_t[i]; S.append(s)
print(S,"%.2f"%(sum(S)/N))
opts=[]
for i in range(8):
    o=[]
    for n in range(n_o[i]+1,n_o[i]+140):
        for f in range(f_o[i],n):
            fr=f/n
            if pct(fr)==fr_t[i] and dl(f_o[i]/n_o[i]-fr)==delta_t[i]:
                o.append((abs(n-t8[i]),n,f))
    o.sort(); opts.append(o[:6])
best=None
for combo in itertools.product(*opts):
    N=sum(c[1] for c in combo);F=sum(c[2] for c in combo)
    if pct(F/N)=="02.18" and dl(sum(f_o)/sum(n_o)-F/N)=="-1.48":
        cost=sum(c[0] for c in combo)
        if best is None or cost<best[0]: best=(cost,combo)
print(best)
combo=[(c[1],c[2]) for c in best[1]]
out={"model":"GPT-4o","categories":[]}
totS=0
for i,(n,f) in enumerate(combo):
    s=round(score_t[i]*n); assert "%.2f"%(s/n)=="%.2f"%score_t[i]; totS+=s
    no,fo=n_o[i],f_o[i]; nr,fr_=n-no,f-fo
    # originals: fails at 3, passes around 8; refined: fails at 2, passes around 6
    # choose orig pass sum so mean orig pass ~8, remainder to refined passes
    po=no-fo; pr=nr-fr_
    rest=s-3*fo-2*fr_
    # refined passes target avg 6
    sr=min(max(6*pr,4*pr),10*pr); so=rest-sr
    while so>10*po: sr+=1; so-=1
    while so<4*po: sr-=1; so+=1
    assert 4*po<=so<=10*po and 4*pr<=sr<=10*pr
    def hist(cnt,total,fail_count,fail_score):
        h={}
        if fail_count: h[str(fail_score)]=fail_count
        if cnt:
            q,r=divmod(total,cnt)
            # r samples at q+1, cnt-r at q
            if cnt-r: h[str(q)]=h.get(str(q),0)+cnt-r
            if r: h[str(q+1)]=h.get(str(q+1),0)+r
        return h
    out["categories"].append({"category":cats[i],"original":hist(po,so,fo,3),"refined":hist(pr,sr,fr_,2)})
print("%.2f"%(totS/sum(c[0] for c in combo)))
json.dump(out,open(os.path.join(os.path.dirname(os.path.abspath(__file__)),"gpt4o_table_fixture.json"),"w"),indent=2)
