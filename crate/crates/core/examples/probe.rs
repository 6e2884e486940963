use heliotrope::photodiff::*;
use heliotrope::corpus::*;
fn main(){ let t=[5.0,15.0,30.0,45.0,60.0,90.0]; for step in [0.25]{ let mut v=vec![]; for seed in 0..200u64{ let p=blur_profile(multimodal_profile(seed).sample(1440),0.0).unwrap(); for (tt,c) in t.iter().zip(created_modes(&p.irradiance,&t,step)){ if !c.is_empty(){v.push((seed,*tt));}}} println!("{step} {} {:?}",v.len(),v);} }
